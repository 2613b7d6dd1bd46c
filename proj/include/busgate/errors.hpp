#pragma once

#include <stdexcept>
#include <string>

namespace busgate {

// Caller misuse: out-of-domain parameters, malformed input, unsupported
// combinations. The CLI maps this to exit code 1.
class usage_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation that ran but failed to reach its accuracy target. Carries
// the best estimate (norm for non-scalar results) so callers can still
// report something. The CLI maps this to exit code 2.
class numerical_error : public std::runtime_error {
public:
    numerical_error(const std::string& what, double best)
        : std::runtime_error(what), best_estimate(best) {}
    double best_estimate;
};

}  // namespace busgate

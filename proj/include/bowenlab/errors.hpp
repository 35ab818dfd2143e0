#pragma once

#include <stdexcept>
#include <string>

namespace bowenlab {

// Error taxonomy. Each condition the library can reject gets its own type so
// callers (and tests) can distinguish them.

struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct domain_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A backward/forward orbit could not be continued (e.g. Newton inverse failed).
struct orbit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// No consistent inverse branch exists (solenoid off-attractor points).
struct branch_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A chart was asked to evaluate outside its valid radius.
struct radius_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An iterative-limit computation left its guaranteed range; signals a
// misconfigured contraction factor.
struct pinch_violation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Leaf intersection for the unstable bracket was not found within the chart.
struct bracket_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct holonomy_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested a dominated-splitting quantity where the measured rates do not
// dominate.
struct domination_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct no_domination : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct usage_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace bowenlab

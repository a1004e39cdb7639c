#pragma once

#include <stdexcept>
#include <string>

namespace funfuse {

struct invalid_argument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct out_of_domain : std::domain_error {
    using std::domain_error::domain_error;
};

struct unsupported_order : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct rank_deficiency : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct insufficient_coverage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct missing_location : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct singular_system : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct divergence_error : std::runtime_error {
    divergence_error(const std::string& what, int iteration)
        : std::runtime_error(what), iter(iteration) {}
    int iter;
};

struct tuning_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_state : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace funfuse

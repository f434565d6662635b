#pragma once

#include <stdexcept>
#include <string>

namespace dupin {

// Error taxonomy shared by all modules. Everything derives from dupin::error
// so callers can catch the library wholesale or per condition.
struct error : std::runtime_error {
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// A caller broke a documented precondition (signature mismatch, non-unit input, ...).
struct contract_violation : error {
    using error::error;
};

// Input data is malformed or outside the supported domain.
struct invalid_input : error {
    using error::error;
};

// A matrix failed orthogonality validation for its signature.
struct invalid_map : error {
    using error::error;
};

// A chart differential lost rank where full rank is required.
struct degenerate_chart : error {
    using error::error;
};

// Transport integration lost unit norm beyond tolerance even after step halving.
struct integrator_failure : error {
    using error::error;
};

// A rank sweep was asked for with too few samples to be meaningful.
struct insufficient_samples : error {
    using error::error;
};

// An operation does not apply to the given configuration (e.g. codimension 1).
struct not_applicable : error {
    using error::error;
};

// No factorization branch reconstructed the input within tolerance.
struct decomposition_failed : error {
    double best_residual;
    decomposition_failed(const std::string& what, double best)
        : error(what), best_residual(best) {}
};

}  // namespace dupin

#pragma once

#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace superlift {

using cplx = std::complex<double>;

// Default tolerances. Coefficient-level equality is 1e-12; residual checks on
// maps and atlases default to 1e-9 and can be overridden per call.
inline constexpr double kCoeffTol = 1e-12;
inline constexpr double kResidualTol = 1e-9;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inversion, log or sqrt of an element whose body vanishes.
struct ZeroBody : Error {
    using Error::Error;
};

// A slot that requires a homogeneous even or odd element got a mixed one.
struct ParityError : Error {
    using Error::Error;
};

// Operands live in Grassmann algebras with different generator counts.
struct SizeMismatch : Error {
    using Error::Error;
};

// A body function vanishes where it must not (unit circle, chart domain).
struct BodyVanishes : Error {
    using Error::Error;
};

// Evaluation outside a function's domain, or a Mobius point hitting the pole
// of the chosen chart branch.
struct OutsideDomain : Error {
    using Error::Error;
};

// Symbolic composition left the supported function family and no sampled
// fallback was requested.
struct UnsupportedComposition : Error {
    using Error::Error;
};

// f' + psi psi' has no square root within the Laurent family.
struct NoSquareRoot : Error {
    using Error::Error;
};

// Function has no reciprocal within the family (non-monomial body).
struct NonInvertible : Error {
    using Error::Error;
};

// Coboundary solution exists but needs degree above the configured bound.
struct DegreeBoundExceeded : Error {
    using Error::Error;
};

// Lattice type data violates the extension identities.
struct InconsistentType : Error {
    using Error::Error;
};

// Transition data outside what the uniformization pipeline supports.
struct UnsupportedBody : Error {
    using Error::Error;
};

// Malformed JSON input (CLI exit code 2).
struct InputError : Error {
    using Error::Error;
};

// Verbosity from the SUPERLIFT_LOG environment variable: unset/0 silent,
// 1 progress notes, 2 chatty. Read once.
inline int log_level() {
    static const int level = [] {
        const char* v = std::getenv("SUPERLIFT_LOG");
        if (!v || !*v) return 0;
        return std::atoi(v);
    }();
    return level;
}

} // namespace superlift

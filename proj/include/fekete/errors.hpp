#pragma once

#include <stdexcept>
#include <string>

namespace fekete {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// geometry
struct NotOnBoundary : Error {
    using Error::Error;
};
struct AmbiguousNormal : Error {
    using Error::Error;
};
struct UnsupportedDomain : Error {
    using Error::Error;
};
struct SingularPoint : Error {
    using Error::Error;
};

// pointcharge
struct CoincidentCharges : Error {
    using Error::Error;
};
struct ChargeOutsideDomain : Error {
    using Error::Error;
};

// equilibrium
struct InfeasibleProblem : Error {
    using Error::Error;
};
struct NonConvexDomain : Error {
    using Error::Error;
};

// imagecharge
struct BallsOverlap : Error {
    using Error::Error;
};
struct SeriesNotConverged : Error {
    using Error::Error;
};
struct InsideConductor : Error {
    using Error::Error;
};
struct SingularSystem : Error {
    using Error::Error;
};

// fieldscan
struct SingularEvaluation : Error {
    using Error::Error;
};
struct SourceOnSurface : Error {
    using Error::Error;
};
struct ResolutionOutOfRange : Error {
    using Error::Error;
};
struct ZeroField : Error {
    using Error::Error;
};

}  // namespace fekete

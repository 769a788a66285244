#pragma once

#include <stdexcept>
#include <string>

namespace strmc {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A sampled point is outside every stratum region.
class UncoveredPointError : public Error {
public:
    using Error::Error;
};

// A stratum produced no exit records, so its row of G cannot be formed.
class StarvedStratumError : public Error {
public:
    using Error::Error;
};

// A stratum weight reached zero during an update.
class VanishingWeightError : public Error {
public:
    using Error::Error;
};

// Linear-algebra failure: singular system, reducible chain, frozen iteration.
class SolverError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Two histograms with different grids were combined or compared.
class GridMismatchError : public Error {
public:
    using Error::Error;
};

// Geometry violates the partition-of-unity contract (should be unreachable
// when strata definitions are validated up front).
class GeometryError : public Error {
public:
    using Error::Error;
};

}  // namespace strmc

#pragma once
#include <stdexcept>
#include <string>

namespace mqs {

// Base for all model-level failures. The CLI maps these to exit code 3;
// ConfigError maps to exit code 2.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// -- collapse kernel --------------------------------------------------------
struct ZeroOverlap : Error {
    explicit ZeroOverlap(const std::string& msg) : Error(msg) {}
};
struct KernelUnderresolved : Error {
    explicit KernelUnderresolved(const std::string& msg) : Error(msg) {}
};
struct DegenerateRoot : Error {
    explicit DegenerateRoot(const std::string& msg) : Error(msg) {}
};
struct GridTooSmall : Error {
    explicit GridTooSmall(const std::string& msg) : Error(msg) {}
};

// -- coherent dynamics ------------------------------------------------------
struct UndepletedAssumptionViolated : Error {
    explicit UndepletedAssumptionViolated(const std::string& msg) : Error(msg) {}
};
struct TruncationError : Error {
    explicit TruncationError(const std::string& msg) : Error(msg) {}
};
struct ZeroProbabilityOutcome : Error {
    explicit ZeroProbabilityOutcome(const std::string& msg) : Error(msg) {}
};
struct FormulaScopeError : Error {
    explicit FormulaScopeError(const std::string& msg) : Error(msg) {}
};

// -- trajectory engine ------------------------------------------------------
struct DarkStateStall : Error {
    explicit DarkStateStall(const std::string& msg) : Error(msg) {}
};

// -- dense reference implementations ----------------------------------------
struct DimensionCap : Error {
    explicit DimensionCap(const std::string& msg) : Error(msg) {}
};
struct StepControlFailure : Error {
    explicit StepControlFailure(const std::string& msg) : Error(msg) {}
};

}  // namespace mqs

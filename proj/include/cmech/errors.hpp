#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmech {

/// Byte offsets [begin, end) into an expression source string.
struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ==================== expression language ====================

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, std::vector<std::string> expected, const std::string& found);
    std::size_t position;
    std::vector<std::string> expected;
};

class UnknownVariable : public Error {
public:
    UnknownVariable(std::string name, std::size_t position);
    std::string name;
    std::size_t position;
};

/// Evaluation outside a function's domain. `time` is filled in when raised during integration.
class DomainError : public Error {
public:
    DomainError(SourceSpan span, const std::string& what);
    SourceSpan span;
    std::optional<double> time;
    std::optional<std::size_t> step;
};

// ==================== numerics ====================

class SingularSystem : public Error { public: using Error::Error; };
class DerivativeDepthExceeded : public Error { public: using Error::Error; };

class NonFinite : public Error {
public:
    NonFinite(double time, std::size_t step);
    double time;
    std::size_t step;
};

// ==================== geometry ====================

class NotOnSubmanifold : public Error { public: using Error::Error; };
class RankDeficient : public Error { public: using Error::Error; };
class SingularLagrangian : public Error { public: using Error::Error; };
class NewtonDivergence : public Error {
public:
    NewtonDivergence(const std::string& what, std::vector<double> last_iterate);
    std::vector<double> last_iterate;
};
class InadmissibleLift : public Error { public: using Error::Error; };
class NotContactomorphism : public Error { public: using Error::Error; };
class NearZeroEnergy : public Error {
public:
    NearZeroEnergy(double time, double value);
    double time;
};
class BoundaryRank : public Error { public: using Error::Error; };
class NoConvergence : public Error { public: using Error::Error; };
class EmptyFinalManifold : public Error { public: using Error::Error; };
class RankUnstable : public Error { public: using Error::Error; };
class SingularCMatrix : public Error { public: using Error::Error; };
class SingularHessian : public Error { public: using Error::Error; };
class SingularC : public Error { public: using Error::Error; };

// ==================== command line ====================

class ConfigError : public Error {
public:
    ConfigError(std::string key_path, const std::string& what);
    std::string key_path;
};
class UnknownSuite : public Error { public: using Error::Error; };

}  // namespace cmech

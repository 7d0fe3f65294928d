#include "cmech/errors.hpp"

#include <sstream>

namespace cmech {

namespace {
std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += (i + 1 == items.size()) ? " or " : ", ";
        out += items[i];
    }
    return out;
}
}  // namespace

SyntaxError::SyntaxError(std::size_t pos, std::vector<std::string> exp, const std::string& found)
    : Error("syntax error at offset " + std::to_string(pos) + ": expected " + join(exp) + ", found " + found),
      position(pos), expected(std::move(exp)) {}

UnknownVariable::UnknownVariable(std::string n, std::size_t pos)
    : Error("unknown variable '" + n + "' at offset " + std::to_string(pos)), name(std::move(n)), position(pos) {}

DomainError::DomainError(SourceSpan s, const std::string& what)
    : Error(what + " (source offsets " + std::to_string(s.begin) + ".." + std::to_string(s.end) + ")"), span(s) {}

NonFinite::NonFinite(double t, std::size_t k)
    : Error([&] {
          std::ostringstream os;
          os << "non-finite state at step " << k << ", t = " << t;
          return os.str();
      }()),
      time(t), step(k) {}

NewtonDivergence::NewtonDivergence(const std::string& what, std::vector<double> last)
    : Error(what), last_iterate(std::move(last)) {}

NearZeroEnergy::NearZeroEnergy(double t, double value)
    : Error([&] {
          std::ostringstream os;
          os << "energy " << value << " too close to zero at t = " << t;
          return os.str();
      }()),
      time(t) {}

ConfigError::ConfigError(std::string key, const std::string& what)
    : Error("config error at '" + key + "': " + what), key_path(std::move(key)) {}

}  // namespace cmech

#pragma once

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>
#include <string>

namespace radiant {

using Index = Eigen::Index;
using Vec3  = Eigen::Vector3d;

inline constexpr double pi = std::numbers::pi;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
  public:
    ParseError(const std::string &what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), m_line(line) {}
    int line() const { return m_line; }

  private:
    int m_line;
};

class MeshError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class SolverError : public Error {
  public:
    using Error::Error;
};

} // namespace radiant

#pragma once

#include <stdexcept>
#include <string>

namespace rtail {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error
{
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "error"; }
};

class InvalidArgument : public Error
{
  public:
    using Error::Error;
    const char* kind() const noexcept override { return "invalid_argument"; }
};

/// The Lundberg root does not exist or could not be bracketed.
class RootError : public Error
{
  public:
    using Error::Error;
    const char* kind() const noexcept override { return "root"; }
};

class QuadratureError : public Error
{
  public:
    QuadratureError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved)
    {
    }
    const char* kind() const noexcept override { return "quadrature"; }
    double achieved_tolerance() const noexcept { return achieved_; }

  private:
    double achieved_;
};

/// A single RESTART run exceeded the failure-draw guard.
class SimulationGuard : public Error
{
  public:
    using Error::Error;
    const char* kind() const noexcept override { return "simulation_guard"; }
};

class ConfigError : public Error
{
  public:
    ConfigError(const std::string& what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }
    const char* kind() const noexcept override { return "config"; }
    int line() const noexcept { return line_; }

  private:
    int line_;
};

}  // namespace rtail

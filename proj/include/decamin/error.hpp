#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace decamin {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TaxonomyError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A stage was asked to run before the artifact it reads exists.
class MissingArtifactError : public Error {
 public:
  explicit MissingArtifactError(const std::filesystem::path& path)
      : Error("missing upstream artifact: " + path.string()), path_(path) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace decamin

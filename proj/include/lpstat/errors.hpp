#pragma once

#include <stdexcept>
#include <string>

namespace lpstat {

//! Bad user input (config, CSV contents, column selection). The CLI maps
//! this (and std::invalid_argument) to exit code 2; other runtime errors
//! exit 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lpstat

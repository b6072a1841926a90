#pragma once

#include <stdexcept>
#include <string>

namespace drtraffic {

class InvalidGeometry : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonPositiveGap : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnknownParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularSystem : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class MissingTrajectory : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class EpisodeFinished : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingCheckpoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace drtraffic

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace council {

/// Base class for all errors raised by the library.
class CouncilError : public std::runtime_error {
 public:
  explicit CouncilError(const std::string& what) : std::runtime_error(what) {}
};

/// Precondition violations (empty inputs, bad ranges, malformed config).
class InvalidInputError : public CouncilError {
 public:
  using CouncilError::CouncilError;
};

/// An outbound agent call failed (provider error, scripted miss, parse failure).
class AgentError : public CouncilError {
 public:
  AgentError(std::string expert_id, const std::string& what)
      : CouncilError(what), expert_id_(std::move(expert_id)) {}
  const std::string& expert_id() const { return expert_id_; }

 private:
  std::string expert_id_;
};

/// Fewer successful experts than the configured quorum.
class QuorumError : public CouncilError {
 public:
  QuorumError(const std::string& what, std::vector<std::string> failed)
      : CouncilError(what), failed_experts_(std::move(failed)) {}
  const std::vector<std::string>& failed_experts() const { return failed_experts_; }

 private:
  std::vector<std::string> failed_experts_;
};

/// Statistic is undefined for the given data (constant series, zero variance).
class DegenerateDataError : public CouncilError {
 public:
  using CouncilError::CouncilError;
};

/// Requested correlation target cannot be realized by the latent-factor model.
class CalibrationError : public CouncilError {
 public:
  CalibrationError(const std::string& what, double rho_min, double rho_max)
      : CouncilError(what), rho_min_(rho_min), rho_max_(rho_max) {}
  double achievable_rho_min() const { return rho_min_; }
  double achievable_rho_max() const { return rho_max_; }

 private:
  double rho_min_;
  double rho_max_;
};

/// Transcript persistence / parsing failures.
class StorageError : public CouncilError {
 public:
  using CouncilError::CouncilError;
};

}  // namespace council

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace vegspot {

// Every module failure carries a short kind tag (DomainError, NewtonDiverged, ...)
// so the CLI can report it verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

inline Error domain_error(const std::string& what) { return Error("DomainError", what); }

}  // namespace vegspot

#pragma once

#include <stdexcept>
#include <string>

namespace unanimous {

// All library faults derive from Error. Abstentions are never faults; they
// are values of Prediction.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnseenAtomError : public Error {
 public:
  explicit UnseenAtomError(const std::string& atom)
      : Error("unseen atom: " + atom), atom_(atom) {}
  const std::string& atom() const { return atom_; }

 private:
  std::string atom_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InconsistentData : public Error {
 public:
  using Error::Error;
};

class NoiseUnsupportedInRelaxation : public Error {
 public:
  using Error::Error;
};

class InfeasiblePolytope : public Error {
 public:
  using Error::Error;
};

class NumericalAmbiguity : public Error {
 public:
  using Error::Error;
};

class CycleDetected : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class SearchSpaceTooLarge : public Error {
 public:
  using Error::Error;
};

class SearchBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class NotSafe : public Error {
 public:
  NotSafe(int which, const std::string& what) : Error(what), which_(which) {}
  // 0 for the first argument, 1 for the second.
  int which() const { return which_; }

 private:
  int which_;
};

class InfeasibleData : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace unanimous

#pragma once

#include <stdexcept>
#include <string>

namespace mstlogit {

/// Base class for all engine errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// dataset ingestion

class MalformedRow : public Error {
  public:
    MalformedRow(long line, const std::string& reason)
        : Error("malformed row at line " + std::to_string(line) + ": " + reason), line(line) {}
    long line;
};

class MissingValue : public Error {
  public:
    MissingValue(const std::string& field, long line)
        : Error("missing value for '" + field + "' at line " + std::to_string(line)),
          field(field), line(line) {}
    std::string field;
    long line;
};

class IndexOutOfRange : public Error {
  public:
    IndexOutOfRange(const std::string& field, long line)
        : Error("index out of range for '" + field + "' at line " + std::to_string(line)),
          field(field), line(line) {}
    std::string field;
    long line;
};

class AgeOutOfRange : public Error {
  public:
    explicit AgeOutOfRange(double age)
        : Error("age " + std::to_string(age) + " outside the configured range") {}
};

class NonpositiveSpan : public Error {
  public:
    NonpositiveSpan() : Error("age span must be positive") {}
};

// location table validation

class AsymmetricMatrix : public Error {
  public:
    AsymmetricMatrix(int matrix, int l, int lp)
        : Error("distance matrix " + std::to_string(matrix) + " asymmetric at (" +
                std::to_string(l) + "," + std::to_string(lp) + ")") {}
};

class NonzeroDiagonal : public Error {
  public:
    NonzeroDiagonal(int matrix, int l)
        : Error("distance matrix " + std::to_string(matrix) + " has nonzero diagonal at " +
                std::to_string(l)) {}
};

class DanglingAdjacency : public Error {
  public:
    DanglingAdjacency(int l, int lp)
        : Error("adjacency lists " + std::to_string(l) + "->" + std::to_string(lp) +
                " but not the reverse") {}
};

class IncompletePartition : public Error {
  public:
    explicit IncompletePartition(int l)
        : Error("location " + std::to_string(l) + " has no region assignment") {}
};

class ZeroDegreeNeighbor : public Error {
  public:
    ZeroDegreeNeighbor(int l, int lp)
        : Error("locations " + std::to_string(l) + "," + std::to_string(lp) +
                " claimed neighbors but a degree is zero") {}
};

// numerical

class NotPositiveDefinite : public Error {
  public:
    explicit NotPositiveDefinite(const std::string& what = "matrix not positive definite")
        : Error(what) {}
};

class ConstraintViolation : public Error {
  public:
    explicit ConstraintViolation(const std::string& what) : Error(what) {}
};

class NonFiniteDensity : public Error {
  public:
    explicit NonFiniteDensity(const std::string& what = "log density not finite") : Error(what) {}
};

// sampler

class AllChainsDiverged : public Error {
  public:
    AllChainsDiverged() : Error("more than half of the iterations diverged in every chain") {}
};

class InsufficientDraws : public Error {
  public:
    explicit InsufficientDraws(const std::string& what = "not enough draws") : Error(what) {}
};

// evaluation

class DegenerateDraws : public Error {
  public:
    explicit DegenerateDraws(const std::string& what) : Error(what) {}
};

class TailTooSmall : public Error {
  public:
    explicit TailTooSmall(int tail)
        : Error("importance-weight tail of " + std::to_string(tail) + " points is too small") {}
};

class MismatchedPoints : public Error {
  public:
    explicit MismatchedPoints(const std::string& what) : Error(what) {}
};

class EmptyGroup : public Error {
  public:
    explicit EmptyGroup(const std::string& what) : Error(what) {}
};

class UnknownProfileField : public Error {
  public:
    explicit UnknownProfileField(const std::string& key)
        : Error("unknown profile field '" + key + "'") {}
};

// simulator

class InsufficientCrossing : public Error {
  public:
    InsufficientCrossing()
        : Error("cohort/age design has no overlap; slopes are not separately identified") {}
};

// configuration

class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace mstlogit

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace softmod {

inline constexpr std::string_view kVersion = "0.3.0";

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }

// Error classes double as the CLI's machine-readable error codes.
enum class ErrorKind {
  kSyntax,
  kReference,
  kOverlap,
  kCountMismatch,
  kEmptyDesign,
  kInfeasibleRange,
  kIllegalDesign,
  kNonFiniteState,
  kNonFiniteGradient,
  kBudgetZero,
  kIncomparablePair,
  kNoConstrainedPrompts,
  kFileFormat,
  kIo,
};

std::string_view error_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class TypedError : public Error {
 public:
  explicit TypedError(const std::string& what) : Error(K, what) {}
};

using SyntaxError = TypedError<ErrorKind::kSyntax>;
using ReferenceError = TypedError<ErrorKind::kReference>;
using OverlapError = TypedError<ErrorKind::kOverlap>;
using CountMismatch = TypedError<ErrorKind::kCountMismatch>;
using EmptyDesign = TypedError<ErrorKind::kEmptyDesign>;
using InfeasibleRange = TypedError<ErrorKind::kInfeasibleRange>;
using IllegalDesign = TypedError<ErrorKind::kIllegalDesign>;
using NonFiniteState = TypedError<ErrorKind::kNonFiniteState>;
using NonFiniteGradient = TypedError<ErrorKind::kNonFiniteGradient>;
using BudgetZero = TypedError<ErrorKind::kBudgetZero>;
using IncomparablePair = TypedError<ErrorKind::kIncomparablePair>;
using NoConstrainedPrompts = TypedError<ErrorKind::kNoConstrainedPrompts>;
using FileFormatError = TypedError<ErrorKind::kFileFormat>;
using IoError = TypedError<ErrorKind::kIo>;

}  // namespace softmod

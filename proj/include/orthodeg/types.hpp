#pragma once

#include <Eigen/Core>

#include <concepts>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace orthodeg {

/// Points and small matrices never exceed three dimensions; the fixed
/// upper bound keeps them on the stack.
template <typename Scalar>
using PointT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, 3, 1>;
template <typename Scalar>
using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

using Point = PointT<double>;
using Mat = MatT<double>;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ORTHODEG_ERROR(Name)          \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  }

ORTHODEG_ERROR(InvalidArgument);
ORTHODEG_ERROR(DivergentIntegral);
ORTHODEG_ERROR(SingularPoint);
ORTHODEG_ERROR(EmptyRegion);
ORTHODEG_ERROR(OutOfDomain);
ORTHODEG_ERROR(EvennessViolation);
ORTHODEG_ERROR(DegenerateFit);
ORTHODEG_ERROR(SolverFailure);
ORTHODEG_ERROR(ParseError);
ORTHODEG_ERROR(ValidationError);

#undef ORTHODEG_ERROR

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

// ---------------------------------------------------------------------------
// Fields

/// A pointwise field that may be discontinuous across the hyperplanes
/// {y_i = 0}. The second argument is a point strictly inside the cell (or
/// half-space) the caller is integrating over; on an interface the
/// one-sided limit from that side is returned. Plain one-argument callables
/// are accepted and ignore the side.
template <typename Value>
class Field {
 public:
  using Fn = std::function<Value(const Point&, const Point&)>;

  Field() = default;

  template <typename F>
    requires std::invocable<const F&, const Point&, const Point&>
  Field(F fn) : fn_(std::move(fn)) {}  // NOLINT

  template <typename F>
    requires(std::invocable<const F&, const Point&> &&
             !std::invocable<const F&, const Point&, const Point&>)
  Field(F fn)  // NOLINT
      : fn_([g = std::move(fn)](const Point& z, const Point&) -> Value { return g(z); }) {}

  Value operator()(const Point& z) const { return fn_(z, z); }
  Value operator()(const Point& z, const Point& inside) const { return fn_(z, inside); }

  explicit operator bool() const { return static_cast<bool>(fn_); }

 private:
  Fn fn_;
};

using ScalarField = Field<double>;
using VectorField = Field<Point>;
using MatrixField = Field<Mat>;

inline ScalarField constant_field(double c) {
  return ScalarField([c](const Point&) { return c; });
}

inline VectorField zero_vector_field(int d) {
  return VectorField([d](const Point&) -> Point { return Point::Zero(d); });
}

/// A smooth function known in closed form together with its gradient.
struct SmoothFunction {
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> gradient;
};

}  // namespace orthodeg

#pragma once

#include <stdexcept>
#include <string>

namespace mgsn {

// Root of every error raised by the library. Callers that only need to
// distinguish "bad input" from "numerical failure" can use category().
class Error : public std::runtime_error {
 public:
  enum class Category { Input, Numerical };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

#define MGSN_DEFINE_ERROR(Name, Cat)                                 \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what)                           \
        : Error(Error::Category::Cat, #Name ": " + what) {}          \
  };

MGSN_DEFINE_ERROR(InvalidParameter, Input)
MGSN_DEFINE_ERROR(DimensionMismatch, Input)
MGSN_DEFINE_ERROR(EmptyInput, Input)
MGSN_DEFINE_ERROR(BadIndexSet, Input)
MGSN_DEFINE_ERROR(OutsideDomain, Input)
MGSN_DEFINE_ERROR(ParseError, Input)
MGSN_DEFINE_ERROR(NotPositiveDefinite, Numerical)
MGSN_DEFINE_ERROR(RankDeficient, Numerical)
MGSN_DEFINE_ERROR(SeriesUnderflow, Numerical)
MGSN_DEFINE_ERROR(DegenerateUpdate, Numerical)
MGSN_DEFINE_ERROR(FitFailure, Numerical)

#undef MGSN_DEFINE_ERROR

}  // namespace mgsn

#pragma once

#include <stdexcept>
#include <string>

namespace ocda {

// Error taxonomy. `category()` drives the CLI exit-code mapping:
// config problems exit 2, data problems exit 3, numeric failures exit 4.
class Error : public std::runtime_error {
 public:
  enum class Category { Config, Data, Numeric };

  Error(Category cat, std::string msg) : std::runtime_error(std::move(msg)), cat_(cat) {}
  Category category() const noexcept { return cat_; }

 private:
  Category cat_;
};

#define OCDA_DEFINE_ERROR(Name, Cat)                                       \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(std::string msg) : Error(Category::Cat, #Name ": " + std::move(msg)) {} \
  }

OCDA_DEFINE_ERROR(EmptyDataset, Data);
OCDA_DEFINE_ERROR(ShapeError, Data);
OCDA_DEFINE_ERROR(LabelError, Data);
OCDA_DEFINE_ERROR(LayoutError, Data);
OCDA_DEFINE_ERROR(SpecError, Config);
OCDA_DEFINE_ERROR(InsufficientData, Data);
OCDA_DEFINE_ERROR(FormatError, Data);
OCDA_DEFINE_ERROR(IoError, Data);
OCDA_DEFINE_ERROR(ConfigError, Config);
OCDA_DEFINE_ERROR(NumericError, Numeric);

#undef OCDA_DEFINE_ERROR

}  // namespace ocda

#pragma once

#include <stdexcept>
#include <string>

namespace msrf {

// Every failure mode carries a stable machine-readable code alongside the
// human-readable message. CLI diagnostics print "error: <code>: <message>".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

#define MSRF_DEFINE_ERROR(Name)                                        \
  struct Name : Error {                                                \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

MSRF_DEFINE_ERROR(PointBehindCamera);
MSRF_DEFINE_ERROR(DistortionInversionDiverged);
MSRF_DEFINE_ERROR(ShapeMismatch);
MSRF_DEFINE_ERROR(ModeError);
MSRF_DEFINE_ERROR(PatchTooSmall);
MSRF_DEFINE_ERROR(CacheMismatch);
MSRF_DEFINE_ERROR(DegenerateConfiguration);
MSRF_DEFINE_ERROR(IllConditioned);
MSRF_DEFINE_ERROR(InconsistentPairs);
MSRF_DEFINE_ERROR(CoincidentCenters);
MSRF_DEFINE_ERROR(EmptyDataset);
MSRF_DEFINE_ERROR(NonFiniteLoss);
MSRF_DEFINE_ERROR(NonFiniteGradient);
MSRF_DEFINE_ERROR(MissingFile);
MSRF_DEFINE_ERROR(SchemaViolation);
MSRF_DEFINE_ERROR(ResolutionMismatch);
MSRF_DEFINE_ERROR(ImageTooSmall);
MSRF_DEFINE_ERROR(IoError);

#undef MSRF_DEFINE_ERROR

}  // namespace msrf

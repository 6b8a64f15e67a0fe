#pragma once

#include <stdexcept>
#include <string>

namespace vbpi {

enum class ErrorKind {
  kInvalidClade,
  kWrongRootedness,
  kMissingEdge,
  kUnsupportedSize,
  kAlignmentShape,
  kDuplicateTaxon,
  kEmptyInput,
  kTaxonSet,
  kParse,
  kRange,
  kDuplicate,
  kIncompatibleCheckpoint,
  kSupportViolation,
  kDomain,
  kContract,
  kBaselineUndefined,
  kInvalidParticle,
  kNonFinite,
  kIo,
};

// Short machine-readable name, used as the CLI error prefix.
inline const char* KindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidClade: return "invalid-clade";
    case ErrorKind::kWrongRootedness: return "wrong-rootedness";
    case ErrorKind::kMissingEdge: return "missing-edge";
    case ErrorKind::kUnsupportedSize: return "unsupported-size";
    case ErrorKind::kAlignmentShape: return "alignment-shape";
    case ErrorKind::kDuplicateTaxon: return "duplicate-taxon";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kTaxonSet: return "taxon-set";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kDuplicate: return "duplicate";
    case ErrorKind::kIncompatibleCheckpoint: return "incompatible-checkpoint";
    case ErrorKind::kSupportViolation: return "support-violation";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kBaselineUndefined: return "baseline-undefined";
    case ErrorKind::kInvalidParticle: return "invalid-particle";
    case ErrorKind::kNonFinite: return "non-finite";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind Kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace vbpi

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace solarcast {

enum class Errc {
  // data
  FileNotFound,
  MalformedCsv,
  SchemaMismatch,
  NegativeTarget,
  MissingTarget,
  DatasetTooSmall,
  AllMissingFeature,
  EmptyInput,
  LengthMismatch,
  TooShort,
  SingleClass,
  // configuration
  InvalidConfig,
  InvalidFoldCount,
  InvalidHyperparameter,
  TopMExceedsFeatureCount,
  // model / serialization
  NonFiniteInput,
  NonFiniteLoss,
  DimensionMismatch,
  IoError,
  BadMagic,
  UnsupportedVersion,
  CorruptPayload,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::MalformedCsv: return "MalformedCsv";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::NegativeTarget: return "NegativeTarget";
    case Errc::MissingTarget: return "MissingTarget";
    case Errc::DatasetTooSmall: return "DatasetTooSmall";
    case Errc::AllMissingFeature: return "AllMissingFeature";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::TooShort: return "TooShort";
    case Errc::SingleClass: return "SingleClass";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidFoldCount: return "InvalidFoldCount";
    case Errc::InvalidHyperparameter: return "InvalidHyperparameter";
    case Errc::TopMExceedsFeatureCount: return "TopMExceedsFeatureCount";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::IoError: return "IoError";
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::CorruptPayload: return "CorruptPayload";
  }
  return "Unknown";
}

/// Process exit code for an error: 1 usage/config, 2 data, 3 model or serialization.
constexpr int exit_code_for(Errc code) {
  switch (code) {
    case Errc::InvalidConfig:
    case Errc::InvalidFoldCount:
    case Errc::InvalidHyperparameter:
    case Errc::TopMExceedsFeatureCount:
      return 1;
    case Errc::NonFiniteInput:
    case Errc::NonFiniteLoss:
    case Errc::DimensionMismatch:
    case Errc::IoError:
    case Errc::BadMagic:
    case Errc::UnsupportedVersion:
    case Errc::CorruptPayload:
      return 3;
    default:
      return 2;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace solarcast

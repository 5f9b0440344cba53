// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace blackspectrum {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BLACKSPECTRUM_DEFINE_ERROR(Name)  \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

// dataset
BLACKSPECTRUM_DEFINE_ERROR(EmptyDocument);
BLACKSPECTRUM_DEFINE_ERROR(IoError);

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class DuplicateId : public Error {
 public:
  DuplicateId(int line, const std::string& id)
      : Error("line " + std::to_string(line) + ": duplicate id '" + id + "'"),
        line_(line), id_(id) {}
  int line() const { return line_; }
  const std::string& id() const { return id_; }

 private:
  int line_;
  std::string id_;
};

// trace provider
BLACKSPECTRUM_DEFINE_ERROR(TemplateError);
BLACKSPECTRUM_DEFINE_ERROR(MissingTraceField);
BLACKSPECTRUM_DEFINE_ERROR(OfflineViolation);

class ApiError : public Error {
 public:
  explicit ApiError(int status, const std::string& message)
      : Error("status " + std::to_string(status) + ": " + message),
        status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class RateLimited : public ApiError {
 public:
  explicit RateLimited(const std::string& message) : ApiError(429, message) {}
};

// embedding
BLACKSPECTRUM_DEFINE_ERROR(EmptyText);
BLACKSPECTRUM_DEFINE_ERROR(EncoderError);
BLACKSPECTRUM_DEFINE_ERROR(DimensionMismatch);
BLACKSPECTRUM_DEFINE_ERROR(ZeroNorm);

// anchors
BLACKSPECTRUM_DEFINE_ERROR(InvalidDistribution);
BLACKSPECTRUM_DEFINE_ERROR(GammaTooLarge);
BLACKSPECTRUM_DEFINE_ERROR(EmptyInput);
BLACKSPECTRUM_DEFINE_ERROR(DegenerateAxis);

// attack
BLACKSPECTRUM_DEFINE_ERROR(EncoderAxisMismatch);

// baselines
BLACKSPECTRUM_DEFINE_ERROR(InsufficientTraces);
BLACKSPECTRUM_DEFINE_ERROR(ScorerError);
BLACKSPECTRUM_DEFINE_ERROR(UnparseableJudgement);

// evaluation
BLACKSPECTRUM_DEFINE_ERROR(DegenerateLabels);
BLACKSPECTRUM_DEFINE_ERROR(InsufficientSamples);
BLACKSPECTRUM_DEFINE_ERROR(ZeroVariance);
BLACKSPECTRUM_DEFINE_ERROR(MixedLabelsWithinDocument);
BLACKSPECTRUM_DEFINE_ERROR(InsufficientVectors);

// pipeline / cli
BLACKSPECTRUM_DEFINE_ERROR(MissingReports);
BLACKSPECTRUM_DEFINE_ERROR(ConfigError);

#undef BLACKSPECTRUM_DEFINE_ERROR

}  // namespace blackspectrum

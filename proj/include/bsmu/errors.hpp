// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace bsmu {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BSMU_DEFINE_ERROR(Name)            \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

// sensor_ingest
BSMU_DEFINE_ERROR(MalformedRecord);
BSMU_DEFINE_ERROR(InvalidTarget);
BSMU_DEFINE_ERROR(InvalidSpec);

// blockstore
BSMU_DEFINE_ERROR(PathExists);
BSMU_DEFINE_ERROR(EmptyPath);
BSMU_DEFINE_ERROR(NotFound);
BSMU_DEFINE_ERROR(CorruptBlock);
BSMU_DEFINE_ERROR(InvalidConfig);

// mapreduce
BSMU_DEFINE_ERROR(MalformedInput);
BSMU_DEFINE_ERROR(JobFailure);

// reduction_jobs
BSMU_DEFINE_ERROR(InvalidSizes);

// energy_model
BSMU_DEFINE_ERROR(MissingSensor);
BSMU_DEFINE_ERROR(NonPositiveValue);
BSMU_DEFINE_ERROR(InvalidShares);

// uplink_cloud
BSMU_DEFINE_ERROR(UncalibratedModel);

// cli_report
BSMU_DEFINE_ERROR(ParseError);
BSMU_DEFINE_ERROR(ValidationError);

#undef BSMU_DEFINE_ERROR

/// Pipeline error annotated with the stage that raised it.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace bsmu

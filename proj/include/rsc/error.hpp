#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rsc {

enum class ErrorCode
{
  // data ingestion
  MissingColumn,
  EmptyAfterFiltering,
  UnparseableFile,
  // argument / precondition
  IndexOutOfRange,
  TooFewObservations,
  InvalidArgument,
  // numeric
  DegenerateSample,
  DegenerateBandwidth,
  NoAnalyticForm,
  TooFewDistinctValues,
  SingularDesign,
  RankDeficientDesign,
  SpecMismatch,
};

//! Short identifier of an error code, e.g. "DegenerateBandwidth".
std::string_view to_string(ErrorCode code) noexcept;

//! True for the codes that come from reading user data files.
bool is_data_error(ErrorCode code) noexcept;

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& what)
    : std::runtime_error(what)
    , code_(code)
  {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace rsc

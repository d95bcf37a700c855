#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sigverify {

// Root of the library's exception hierarchy. Everything thrown on purpose
// derives from this, so callers can catch one type at the boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised while reading a signature, decomposition, template or manifest
// file. Carries the 1-based line number of the offending record.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MalformedHeader : public ParseError {
 public:
  using ParseError::ParseError;
};

class NonMonotonicTime : public ParseError {
 public:
  using ParseError::ParseError;
};

class SampleCountMismatch : public ParseError {
 public:
  using ParseError::ParseError;
};

class ValueOutOfRange : public ParseError {
 public:
  using ParseError::ParseError;
};

class MissingManifestFile : public Error {
 public:
  using Error::Error;
};

// Manifest row points at a signature file that does not exist.
class DanglingReference : public ParseError {
 public:
  using ParseError::ParseError;
};

// Same user_id appears in more than one split.
class DuplicateUserId : public ParseError {
 public:
  using ParseError::ParseError;
};

// Fewer usable samples than the stage in question can work with.
class TooFewSamples : public Error {
 public:
  using Error::Error;
};

// Preprocessed signature shorter than the widest channel window.
class SignatureTooShort : public TooFewSamples {
 public:
  using TooFewSamples::TooFewSamples;
};

class EmptySubset : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class EmptyStrokeList : public Error {
 public:
  using Error::Error;
};

// Speed profile shorter than the decomposer can analyze.
class ProfileTooShort : public Error {
 public:
  using Error::Error;
};

// A single stroke's least-squares refinement failed to produce a usable
// bell. The decomposer catches this, masks the bump and moves on.
class FitDiverged : public Error {
 public:
  using Error::Error;
};

class EmptyEnrollment : public Error {
 public:
  using Error::Error;
};

// DTW operands disagree on channel count, or one side is empty.
class ChannelMismatch : public Error {
 public:
  using Error::Error;
};

class EmptySequence : public Error {
 public:
  using Error::Error;
};

// Probe channel set does not match the template's stored subset.
class SubsetMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyScoreList : public Error {
 public:
  using Error::Error;
};

// The subset evaluator passed to feature selection threw or returned a
// non-finite value.
class EvaluatorFailure : public Error {
 public:
  using Error::Error;
};

// A scored user has no complexity level attached.
class MissingLevel : public Error {
 public:
  using Error::Error;
};

// Template's device profile disagrees with the requested one.
class ProfileMismatch : public Error {
 public:
  using Error::Error;
};

class IoFailure : public Error {
 public:
  using Error::Error;
};

// A user in the protocol lacks the required number of first-session
// genuine signatures for enrollment.
class InsufficientEnrollment : public Error {
 public:
  using Error::Error;
};

class EmptyEvaluationSplit : public Error {
 public:
  using Error::Error;
};

}  // namespace sigverify

#ifndef LBD_ERROR_HPP_
#define LBD_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace lbd {

// Every failure the library reports carries one of these kinds. The CLI maps
// kinds to exit codes and the service maps them to HTTP statuses.
enum class ErrorKind {
  kInvalidArgument,
  kIoFailure,
  kMalformedRecord,
  kDuplicateDocId,
  kDuplicateSentence,
  kNodeNotFound,
  kNoPath,
  kEmptyPath,
  kEmptyGraph,
  kEmptyCorpus,
  kInsufficientCodedTerms,
  kMissingEmbedding,
  kSamePair,
  kTooFewPoints,
  kMissingArtifact,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lbd

#endif  // LBD_ERROR_HPP_

#pragma once

#include <stdexcept>
#include <string>

namespace facetnav {

// Input that violates a file-format or referential-integrity rule.
class ValidationError : public std::runtime_error {
 public:
  enum class Code {
    kParse,
    kDuplicateDocId,
    kEmptyDocId,
    kEmptySentence,
    kTextMismatch,
    kUnknownDocId,
    kSpanOutOfRange,
    kDuplicateMentionId,
    kUnknownMentionId,
    kScoreOutOfRange,
    kSelfPair,
    kDuplicatePair,
    kEmptyCluster,
    kCrossDocumentCluster,
    kSurfaceMismatch,
    kBadIndex,
  };

  ValidationError(Code code, std::string message, std::string file = {},
                  int line = 0)
      : std::runtime_error(Format(code, message, file, line)),
        code_(code),
        file_(std::move(file)),
        line_(line) {}

  Code code() const { return code_; }
  const std::string &file() const { return file_; }
  int line() const { return line_; }

  static const char *CodeName(Code code);

 private:
  static std::string Format(Code code, const std::string &message,
                            const std::string &file, int line);

  Code code_;
  std::string file_;
  int line_;
};

// Lookup of an id (topic, value, document, session) that does not exist.
class NotFoundError : public std::runtime_error {
 public:
  NotFoundError(std::string what, std::string id)
      : std::runtime_error(what + " not found: " + id),
        kind_(std::move(what)),
        id_(std::move(id)) {}

  const std::string &kind() const { return kind_; }
  const std::string &id() const { return id_; }

 private:
  std::string kind_;
  std::string id_;
};

}  // namespace facetnav

#pragma once

#include <stdexcept>
#include <string>

namespace pie {

struct PieError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A value containing a non-serializable foreign object was asked to serialize.
struct NonSerializableError : PieError {
  explicit NonSerializableError(std::string type_name)
      : PieError("value of foreign type '" + type_name + "' is not serializable"),
        type_name(std::move(type_name)) {}
  std::string type_name;
};

struct DecodeError : PieError {
  using PieError::PieError;
};

struct IoError : PieError {
  using PieError::PieError;
};

struct CorruptStoreError : PieError {
  using PieError::PieError;
};

struct UnknownTaskError : PieError {
  explicit UnknownTaskError(const std::string& func_id)
      : PieError("no task registered for function '" + func_id + "'"), func_id(func_id) {}
  std::string func_id;
};

// A pipeline function aborted: explicit `fail`, a host exception, or a
// failing external process.
struct TaskFailedError : PieError {
  using PieError::PieError;
};

struct NullAssertionError : PieError {
  NullAssertionError() : PieError("non-null assertion on a null value") {}
};

struct IntOverflowError : PieError {
  IntOverflowError() : PieError("integer overflow in '+'") {}
};

struct ExecutableNotFoundError : PieError {
  explicit ExecutableNotFoundError(const std::string& name)
      : PieError("executable not found: " + name) {}
};

struct UnresolvedForeignError : PieError {
  explicit UnresolvedForeignError(const std::string& name)
      : PieError("unresolved foreign binding '" + name + "'"), name(name) {}
  std::string name;
};

struct UnknownFunctionError : PieError {
  explicit UnknownFunctionError(const std::string& name)
      : PieError("unknown function '" + name + "'"), name(name) {}
  std::string name;
};

struct UnknownMethodError : PieError {
  explicit UnknownMethodError(const std::string& recv, const std::string& name)
      : PieError("unknown method '" + name + "' on " + recv) {}
};

struct ArgumentMismatchError : PieError {
  using PieError::PieError;
};

struct InvalidPatternError : PieError {
  using PieError::PieError;
};

}  // namespace pie

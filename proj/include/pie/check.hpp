#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pie/ast.hpp"
#include "pie/diagnostics.hpp"

namespace pie {

// Semantic types. Optional(Optional(t)) is collapsed on construction.
class Type {
 public:
  enum class Kind : uint8_t { Unit, Bool, Int, Str, Path, Data, Optional, List, Tuple, Null, Error };

  static Type unit() { return Type(Kind::Unit); }
  static Type boolean() { return Type(Kind::Bool); }
  static Type integer() { return Type(Kind::Int); }
  static Type str() { return Type(Kind::Str); }
  static Type path() { return Type(Kind::Path); }
  static Type data(std::string name) {
    Type t(Kind::Data);
    t.name_ = std::move(name);
    return t;
  }
  static Type optional(Type inner);
  static Type list(Type inner) {
    Type t(Kind::List);
    t.elems_.push_back(std::move(inner));
    return t;
  }
  static Type tuple(std::vector<Type> elems) {
    Type t(Kind::Tuple);
    t.elems_ = std::move(elems);
    return t;
  }
  // Type of `null`; assignable to any optional.
  static Type null() { return Type(Kind::Null); }
  // Poison type after a diagnostic; compatible with everything.
  static Type error() { return Type(Kind::Error); }

  Kind kind() const { return kind_; }
  const std::string& data_name() const { return name_; }
  const Type& inner() const { return elems_[0]; }
  const std::vector<Type>& elems() const { return elems_; }

  bool is_error() const { return kind_ == Kind::Error; }
  bool operator==(const Type& o) const;
  bool operator!=(const Type& o) const { return !(*this == o); }

  std::string show() const;

 private:
  explicit Type(Kind k) : kind_(k) {}
  Kind kind_;
  std::string name_;
  std::vector<Type> elems_;
};

struct DataInfo {
  std::string name;
  std::optional<std::string> super;
  std::string binding;
  // name -> (param types, return type)
  std::map<std::string, std::pair<std::vector<Type>, Type>> methods;
};

struct FuncInfo {
  std::string name;
  std::vector<Type> params;
  Type ret = Type::unit();
  bool is_foreign = false;
  std::string foreign_binding;
};

struct TypedProgram {
  ast::Program program;
  std::unordered_map<const ast::Expr*, Type> types;
  std::map<std::string, DataInfo> data_table;
  std::map<std::string, FuncInfo> func_table;

  const Type* type_of(const ast::Expr& e) const {
    auto it = types.find(&e);
    return it == types.end() ? nullptr : &it->second;
  }
};

struct CheckResult {
  std::shared_ptr<const TypedProgram> typed;  // present iff no errors
  std::vector<Diagnostic> diagnostics;
};

CheckResult check(ast::Program program);

// Declared signature of an entry function; throws UnknownFunctionError.
std::pair<std::vector<Type>, Type> entry_signature(const TypedProgram& tp,
                                                   const std::string& func);

}  // namespace pie

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pie::ast {

// Byte offsets into the source text.
struct Span {
  uint32_t lo = 0;
  uint32_t hi = 0;
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class BinaryOp : uint8_t { Eq, Ne, Or, And, Add };
const char* binary_op_text(BinaryOp op);

enum class StamperName : uint8_t { Exists, Modified, Hash };
enum class FilterName : uint8_t { Regex, Pattern, Patterns, Extension, Extensions };

struct TypeExpr;
using TypeExprPtr = std::unique_ptr<TypeExpr>;

struct TypeExpr {
  struct Unit {};
  struct Bool {};
  struct Int {};
  struct Str {};
  struct Path {};
  struct Named {
    std::string name;
  };
  struct Optional {
    TypeExprPtr inner;
  };
  struct List {
    TypeExprPtr inner;
  };
  struct Tuple {
    std::vector<TypeExprPtr> elems;
  };

  Span span;
  std::variant<Unit, Bool, Int, Str, Path, Named, Optional, List, Tuple> node;
};

struct Bind {
  std::string name;
  std::optional<TypeExprPtr> type;
  Span span;
};

struct Binder {
  bool tuple = false;  // false: single bind
  std::vector<Bind> binds;
  Span span;
};

// String/path literal part: literal text or an embedded expression.
using InterpPart = std::variant<std::string, ExprPtr>;

struct FilterExpr {
  FilterName name;
  ExprPtr arg;
};

struct Expr {
  struct Block {
    std::vector<ExprPtr> stmts;
  };
  struct Not {
    ExprPtr operand;
  };
  struct NonNull {
    ExprPtr operand;
  };
  struct Binary {
    BinaryOp op;
    ExprPtr lhs, rhs;
  };
  struct If {
    ExprPtr cond, then_branch;
    ExprPtr else_branch;  // may be null
  };
  struct Comprehension {
    struct Gen {
      Binder binder;
      ExprPtr source;
    };
    ExprPtr body;
    std::vector<Gen> gens;
  };
  struct ValDecl {
    Binder binder;
    ExprPtr rhs;
  };
  struct Ref {
    std::string name;
  };
  struct Call {
    std::string name;
    std::vector<ExprPtr> args;
  };
  struct MethodCall {
    ExprPtr recv;
    std::string name;
    std::vector<ExprPtr> args;
  };
  struct Requires {
    ExprPtr path;
    std::optional<FilterExpr> filter;
    std::optional<StamperName> stamper;
  };
  struct Generates {
    ExprPtr path;
    std::optional<StamperName> stamper;
  };
  struct ExistsOp {
    ExprPtr path;
  };
  struct ReadOp {
    ExprPtr path;
  };
  struct ListOp {
    ExprPtr path;
    std::optional<FilterExpr> filter;
  };
  struct WalkOp {
    ExprPtr path;
    std::optional<FilterExpr> filter;
  };
  struct Return {
    ExprPtr value;
  };
  struct Fail {
    ExprPtr message;
  };
  struct UnitLit {};
  struct BoolLit {
    bool value;
  };
  struct IntLit {
    int64_t value;
  };
  struct NullLit {};
  struct TupleLit {
    std::vector<ExprPtr> elems;
  };
  struct ListLit {
    std::vector<ExprPtr> elems;
  };
  struct StrInterp {
    std::vector<InterpPart> parts;
  };
  struct PathLit {
    bool relative = true;
    std::vector<InterpPart> parts;
  };

  Span span;
  std::variant<Block, Not, NonNull, Binary, If, Comprehension, ValDecl, Ref, Call, MethodCall,
               Requires, Generates, ExistsOp, ReadOp, ListOp, WalkOp, Return, Fail, UnitLit,
               BoolLit, IntLit, NullLit, TupleLit, ListLit, StrInterp, PathLit>
      node;
};

struct Param {
  std::string name;
  TypeExprPtr type;
  Span span;
};

struct FuncHead {
  std::string name;
  std::vector<Param> params;
  TypeExprPtr ret;
  Span span;
};

struct FuncDef {
  FuncHead head;
  // Exactly one of: foreign binding name, or a body expression.
  std::optional<std::string> foreign_binding;
  std::optional<std::string> foreign_java_qid;  // retained from `foreign java qid # id`
  ExprPtr body;
  Span span;
};

struct DataDef {
  std::string name;
  std::optional<std::string> super;
  std::string binding;  // name after `foreign java`
  std::vector<FuncHead> methods;
  Span span;
};

struct Program {
  using Def = std::variant<FuncDef, DataDef>;
  std::vector<Def> defs;
  std::string origin;  // source path, for diagnostics
};

// Structural equality ignoring spans.
bool equal(const TypeExpr& a, const TypeExpr& b);
bool equal(const Expr& a, const Expr& b);
bool equal(const Program& a, const Program& b);

}  // namespace pie::ast

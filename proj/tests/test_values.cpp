#include <random>

#include "doctest.h"
#include "pie/eval.hpp"
#include "pie/value.hpp"

using namespace pie;

namespace {

Value fx(std::string type, std::string payload, bool serializable = true) {
  return Value::foreign(
      std::make_shared<BytesForeign>(std::move(type), std::move(payload), serializable));
}

// Random serializable value generator for the injectivity/round-trip laws.
Value random_value(std::mt19937& rng, int depth = 0) {
  std::uniform_int_distribution<int> pick(0, depth >= 3 ? 6 : 8);
  static const char* words[] = {"", "a", "set", "clojure", "-o", "päth", "x y", "./a/b"};
  std::uniform_int_distribution<int> word(0, 7);
  switch (pick(rng)) {
    case 0: return Value::unit();
    case 1: return Value::boolean(rng() & 1);
    case 2: return Value::integer(static_cast<int64_t>(rng()) - static_cast<int64_t>(rng()));
    case 3: return Value::str(words[word(rng)]);
    case 4: return Value::path(std::string("./") + words[word(rng)]);
    case 5: return Value::null();
    case 6: return fx("T", words[word(rng)]);
    case 7: {
      std::uniform_int_distribution<int> n(0, 3);
      std::vector<Value> elems;
      for (int i = n(rng); i > 0; i--) elems.push_back(random_value(rng, depth + 1));
      return Value::list(std::move(elems));
    }
    default: {
      std::uniform_int_distribution<int> n(2, 3);
      std::vector<Value> elems;
      for (int i = n(rng); i > 0; i--) elems.push_back(random_value(rng, depth + 1));
      return Value::tuple(std::move(elems));
    }
  }
}

}  // namespace

TEST_CASE("encode: tag-only and scalar layouts") {
  CHECK(Value::unit().encode() == Bytes{std::byte{0x00}});
  CHECK(Value::null().encode() == Bytes{std::byte{0x05}});

  Bytes int0 = Value::integer(0).encode();
  REQUIRE(int0.size() == 9);
  CHECK(int0[0] == std::byte{0x02});
  for (size_t i = 1; i < 9; i++) CHECK(int0[i] == std::byte{0});

  Bytes neg = Value::integer(-1).encode();
  CHECK(neg[0] == std::byte{0x02});
  for (size_t i = 1; i < 9; i++) CHECK(neg[i] == std::byte{0xff});

  CHECK(Value::boolean(true).encode() == Bytes{std::byte{0x01}, std::byte{0x01}});

  Bytes s = Value::str("ab").encode();
  CHECK(s == Bytes{std::byte{0x03}, std::byte{2}, std::byte{0}, std::byte{0}, std::byte{0},
                   std::byte{'a'}, std::byte{'b'}});
}

TEST_CASE("encode: equal tuples byte-for-byte") {
  Value a = Value::tuple({Value::str("set"), Value::str("clojure")});
  Value b = Value::tuple({Value::str("set"), Value::str("clojure")});
  CHECK(a == b);
  CHECK(a.encode() == b.encode());
}

TEST_CASE("equality: tags and structure") {
  CHECK(Value::null() == Value::null());
  CHECK(Value::integer(1) != Value::str("1"));
  Value t1 = Value::tuple({Value::path("./lexical.sdf"), Value::path("./contextfree.sdf")});
  Value t2 = Value::tuple({Value::path("./lexical.sdf"), Value::path("./contextfree.sdf")});
  CHECK(t1 == t2);
  CHECK(Value::boolean(true) != Value::integer(1));
  CHECK(fx("A", "x") == fx("A", "x"));
  CHECK(fx("A", "x") != fx("B", "x"));
  CHECK(fx("A", "x") != fx("A", "y"));
}

TEST_CASE("display strings") {
  CHECK(Value::path("./parse.tbl").display() == "./parse.tbl");
  CHECK(Value::integer(-3).display() == "-3");
  CHECK(Value::unit().display() == "unit");
  CHECK(Value::null().display() == "null");
  CHECK(Value::boolean(false).display() == "false");
  // interpolation of "-o$file"
  Value file = Value::path("a.sdf");
  CHECK("-o" + file.display() == "-oa.sdf");
  Value lst = Value::list({Value::integer(1), Value::str("x")});
  CHECK(lst.display() == "[1, x]");
  Value tup = Value::tuple({Value::integer(1), Value::integer(2)});
  CHECK(tup.display() == "(1, 2)");
}

TEST_CASE("path normalization") {
  // a leading "./" is a relative marker and survives; it is not added
  CHECK(normalize_path_text("./parse.tbl") == "./parse.tbl");
  CHECK(normalize_path_text("parse.tbl") == "parse.tbl");
  CHECK(normalize_path_text("a/../b") == "b");
  CHECK(normalize_path_text("./a/../b") == "./b");
  CHECK(normalize_path_text("a//b/") == "a/b");
  CHECK(normalize_path_text("/a/b/../c") == "/a/c");
  CHECK(normalize_path_text("/") == "/");
  CHECK(normalize_path_text("/..") == "/");
  CHECK(normalize_path_text("") == ".");
  CHECK(normalize_path_text("./") == ".");
  CHECK(normalize_path_text("../x") == "../x");
  CHECK(normalize_path_text("./../x") == "../x");
  CHECK(normalize_path_text("a/./b") == "a/b");
  CHECK(normalize_path_text("./a/./b") == "./a/b");

  // idempotence over a generated corpus
  std::mt19937 rng(7);
  const char* segs[] = {"a", "..", ".", "b.txt", ""};
  for (int i = 0; i < 500; i++) {
    std::string p = (rng() & 1) ? "/" : "";
    std::uniform_int_distribution<int> n(0, 5), s(0, 4);
    for (int k = n(rng); k > 0; k--) p += std::string(segs[s(rng)]) + "/";
    std::string once = normalize_path_text(p);
    CHECK(normalize_path_text(once) == once);
  }
}

TEST_CASE("non-serializable foreign values are rejected by encode") {
  Value t = fx("TableObj", "digest", /*serializable=*/false);
  CHECK(!t.serializable());
  CHECK_THROWS_AS((void)t.encode(), NonSerializableError);
  Value nested = Value::list({Value::integer(1), t});
  CHECK(!nested.serializable());
  CHECK_THROWS_AS((void)nested.encode(), NonSerializableError);
}

TEST_CASE("property: injectivity and decode round-trip") {
  std::mt19937 rng(42);
  OpaqueCodec codec;
  std::vector<Value> corpus;
  for (int i = 0; i < 300; i++) corpus.push_back(random_value(rng));

  for (const Value& v : corpus) {
    Bytes enc = v.encode();
    Value back = decode_value(enc, &codec);
    CHECK(back == v);             // round trip
    CHECK(back.encode() == enc);  // re-encoding is stable
  }
  for (size_t i = 0; i < corpus.size(); i += 3) {
    for (size_t j = 0; j < corpus.size(); j += 7) {
      bool eq = corpus[i] == corpus[j];
      bool enc_eq = corpus[i].encode() == corpus[j].encode();
      CHECK(eq == enc_eq);  // encode(a)==encode(b) iff a==b
    }
  }
}

TEST_CASE("decode rejects malformed input") {
  CHECK_THROWS_AS(decode_value({}, nullptr), DecodeError);
  Bytes bad{std::byte{0x63}};
  CHECK_THROWS_AS(decode_value(bad, nullptr), DecodeError);
  Bytes trailing = Value::unit().encode();
  trailing.push_back(std::byte{0});
  CHECK_THROWS_AS(decode_value(trailing, nullptr), DecodeError);
  Bytes truncated = Value::str("hello").encode();
  truncated.pop_back();
  CHECK_THROWS_AS(decode_value(truncated, nullptr), DecodeError);
  // foreign without codec
  Bytes f = fx("T", "x").encode();
  CHECK_THROWS_AS(decode_value(f, nullptr), DecodeError);
}

#include "doctest.h"
#include "qm/localdata.hpp"

using namespace qm;

TEST_CASE("tuple grammar round trips") {
  for (const char* text : {
           "inf=C",
           "inf=R",
           "inf=C;3=rm",
           "inf=C;3=rm+",
           "inf=C;3=rm-",
           "inf=R;3=rm;5=in",
           "inf=C;5=rm-;7=sp",
           "inf=C;2=rm:d2",
           "inf=C;2=rm:d3;5=rm+",
           "inf=R;2=sp;11=in",
       }) {
    auto s = parse_stuple(text);
    CHECK(format_stuple(s) == text);
    auto s2 = parse_stuple(format_stuple(s));
    CHECK(s2.arch == s.arch);
    CHECK(s2.finite == s.finite);
  }
  // canonical form sorts the finite places
  CHECK(format_stuple(parse_stuple("inf=C;7=sp;5=rm-")) == "inf=C;5=rm-;7=sp");
}

TEST_CASE("tuple grammar fields") {
  auto s = parse_stuple("inf=C;2=rm:d3;5=rm+;7=in");
  CHECK(s.arch == ArchKind::CC);
  REQUIRE(s.finite.size() == 3);
  CHECK(s.finite.at(2).kind == Kind::Ramified);
  CHECK(s.finite.at(2).delta == 3);
  CHECK_FALSE(s.finite.at(2).tag.has_value());
  CHECK(s.finite.at(5).kind == Kind::Ramified);
  CHECK(s.finite.at(5).delta == 1);
  REQUIRE(s.finite.at(5).tag.has_value());
  CHECK(*s.finite.at(5).tag == 1);
  CHECK(s.finite.at(7).kind == Kind::Inert);
  CHECK(parse_stuple("inf=R").arch == ArchKind::RR);
  CHECK(*parse_stuple("inf=C;3=rm-").finite.at(3).tag == -1);
}

TEST_CASE("tuple grammar rejections") {
  struct Bad {
    const char* text;
    const char* token;
  } bad[] = {
      {"", "inf"},
      {"3=sp", "3=sp"},
      {"inf=X", "inf=X"},
      {"inf=C;4=sp", "4"},
      {"inf=C;1=sp", "1"},
      {"inf=C;-3=in", "-3"},
      {"inf=C;p=sp", "p"},
      {"inf=C;3", "3"},
      {"inf=C;3=xx", "xx"},
      {"inf=C;2=rm", "rm"},
      {"inf=C;2=rm+", "rm+"},
      {"inf=C;2=rm-", "rm-"},
      {"inf=C;3=rm:d2", "rm:d2"},
      {"inf=C;2=rm:d4", "rm:d4"},
      {"inf=C;3=sp;3=in", "3"},
      {"inf=C;;3=sp", ""},
      {"inf=C;3=", ""},
  };
  for (auto& b : bad) {
    CAPTURE(b.text);
    CHECK_THROWS_AS(parse_stuple(b.text), ParseError);
    try {
      parse_stuple(b.text);
    } catch (const ParseError& e) {
      CHECK(e.token == b.token);
      CHECK(e.position <= std::string(b.text).size());
      CHECK(std::string(e.what()).size() > 0);
    }
  }
}

TEST_CASE("parse error position points into the text") {
  try {
    parse_stuple("inf=C;3=sp;4=in");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position == 11);
    CHECK(e.token == "4");
  }
  try {
    parse_stuple("inf=R;5=zz");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position == 8);
    CHECK(e.token == "zz");
  }
}

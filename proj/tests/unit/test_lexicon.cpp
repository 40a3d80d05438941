#include "doctest.h"
#include "halle/error.hpp"
#include "halle/lexicon.hpp"
#include "support/test_util.hpp"

using namespace halle;

TEST_SUITE("lexicon") {
  TEST_CASE("default singular rules") {
    const auto s = Singularizer::defaults();
    CHECK(s.singularize("cars") == "car");
    CHECK(s.singularize("toothbrushes") == "toothbrush");
    CHECK(s.singularize("benches") == "bench");
    CHECK(s.singularize("boxes") == "box");
    CHECK(s.singularize("cherries") == "cherry");
    CHECK(s.singularize("glasses") == "glasses");
    CHECK(s.singularize("bus") == "bus");
    CHECK(s.singularize("people") == "person");
    CHECK(s.singularize("knives") == "knife");
    CHECK(s.singularize("shelves") == "shelf");
    CHECK(s.singularize("gloves") == "glove");
    CHECK(s.singularize("horses") == "horse");
    CHECK(s.singularize("dishes") == "dish");
    CHECK(s.singularize("pants") == "pants");
    CHECK(s.singularize("grass") == "grass");
    CHECK(s.singularize("octopus") == "octopus");
  }

  TEST_CASE("candidates start with the word itself") {
    const auto s = Singularizer::defaults();
    auto c = s.candidates("cars");
    REQUIRE(!c.empty());
    CHECK(c.front() == "cars");
    CHECK(std::find(c.begin(), c.end(), "car") != c.end());
  }

  TEST_CASE("custom rule file") {
    auto s = Singularizer::parse({"rule i -> us", "irregular geese -> goose", "invariant data"});
    CHECK(s.singularize("cacti") == "cactus");
    CHECK(s.singularize("geese") == "goose");
    CHECK(s.singularize("data") == "data");
    CHECK_ERROR_CODE(Singularizer::parse({"bogus line"}), ErrorCode::kInvalidConfig);
  }

  TEST_CASE("canonicalizer strips quantifiers and plural") {
    Canonicalizer c;
    CHECK(c.canonicalize("Two Cars") == "car");
    CHECK(c.canonicalize("a few cups") == "cup");
    CHECK(c.canonicalize("several  Black Shoes") == "black shoe");
    CHECK(c.canonicalize("3 apples") == "apple");
    CHECK(c.canonicalize("Drinking glasses") == "drinking glasses");
    CHECK(c.canonicalize("the") == "the");
  }

  TEST_CASE("shipped lexicon loads and validates") {
    const auto& lex = testutil::lexicon();
    CHECK(lex.object_terms.size() > 250);
    CHECK(lex.object_terms.at("plate") == "dish");
    CHECK(lex.object_terms.at("bottle of water") == "water");
    CHECK(lex.is_stoplisted("dining room"));
    CHECK(lex.is_stoplisted("center"));
    CHECK(!lex.is_stoplisted("table"));
    CHECK(lex.max_phrase_words() >= 3);
  }

  TEST_CASE("stoplisted object term is a config error") {
    CHECK_ERROR_CODE(ObjectLexicon::from_terms({"table", "kitchen"}, {"kitchen"}),
                     ErrorCode::kInvalidConfig);
  }
}

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "elv/corpus.hpp"
#include "elv/dsl.hpp"

using namespace elv;

TEST_CASE("tokenize splits punctuation and lowercases") {
  CHECK(tokenize("The food is wonderful,") ==
        std::vector<std::string>{"the", "food", "is", "wonderful", ","});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("SUBJ 's mother OBJ") ==
        std::vector<std::string>{"subj", "'s", "mother", "obj"});
}

TEST_CASE("tokenize handles clitics attached to words") {
  CHECK(tokenize("Burke's mother") == std::vector<std::string>{"burke", "'s", "mother"});
  CHECK(tokenize("don't stop") == std::vector<std::string>{"don", "'t", "stop"});
}

TEST_CASE("tokenize is idempotent on rejoined output") {
  auto check = [](const std::string& text) {
    auto once = tokenize(text);
    auto twice = tokenize(join_tokens(once));
    CHECK(once == twice);
  };
  check("The only thing more wonderful than the food is the service.");
  check("Burke 's mother Melissa Bell, a singer!");
  check("weird  spacing\tand Tabs");
  check("hyphen-ated and (parens)");
}

static std::string jsonl_fixture() {
  return R"({"id":"r1","text":"The food is wonderful, I really enjoyed it.","anchors":{"TERM":[1,2]},"label":"positive"}
{"id":"r2","text":"The only thing more wonderful than the food is the service.","anchors":{"TERM":[7,8]},"label":"positive","explanation":"The word \"wonderful\" occurs within three words before the term"}
{"id":"r3","text":"Delivery took forever.","anchors":{"TERM":[0,1]}}
)";
}

TEST_CASE("load routes instances by field presence") {
  std::istringstream in(jsonl_fixture());
  auto parts = load_dataset_stream(in, TaskSchema::Term);
  REQUIRE(parts.d_e.size() == 1);
  REQUIRE(parts.d_l.size() == 1);
  REQUIRE(parts.d_u.size() == 1);
  CHECK(parts.d_l[0].id == "r1");
  CHECK(parts.d_e[0].id == "r2");
  CHECK(parts.d_u[0].id == "r3");
  CHECK(parts.total() == 3);
  CHECK(parts.label_space.labels == std::vector<std::string>{"positive"});
}

TEST_CASE("load/dump round trip") {
  std::istringstream in(jsonl_fixture());
  auto parts = load_dataset_stream(in, TaskSchema::Term);
  std::ostringstream out;
  dump_dataset_stream(parts, out);
  std::istringstream in2(out.str());
  auto parts2 = load_dataset_stream(in2, TaskSchema::Term);
  CHECK(parts == parts2);
}

TEST_CASE("load rejects malformed input with line numbers") {
  std::istringstream in(R"({"id":"a","text":"x y","anchors":{"TERM":[0,1]},"label":"l"}
this is not json
)");
  try {
    load_dataset_stream(in, TaskSchema::Term);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("load rejects unknown labels when a label list is given") {
  std::istringstream in(R"({"id":"a","text":"x y","anchors":{"TERM":[0,1]},"label":"mystery"}
)");
  LoadOptions opt;
  opt.labels = std::vector<std::string>{"positive", "negative"};
  CHECK_THROWS_AS(load_dataset_stream(in, TaskSchema::Term, opt), DataError);
}

TEST_CASE("load names the instance on a bad explanation") {
  std::istringstream in(R"({"id":"bad9","text":"x y","anchors":{"TERM":[0,1]},"label":"l","explanation":"utter gibberish here"}
)");
  try {
    load_dataset_stream(in, TaskSchema::Term);
    FAIL("expected DslParseError");
  } catch (const DslParseError& e) {
    CHECK(std::string(e.what()).find("bad9") != std::string::npos);
  }
}

TEST_CASE("load validates anchor spans and schema") {
  std::istringstream bad_span(R"({"id":"a","text":"x y","anchors":{"TERM":[0,5]},"label":"l"}
)");
  CHECK_THROWS_AS(load_dataset_stream(bad_span, TaskSchema::Term), DataError);

  std::istringstream wrong_schema(R"({"id":"a","text":"x y","anchors":{"SUBJ":[0,1]},"label":"l"}
)");
  CHECK_THROWS_AS(load_dataset_stream(wrong_schema, TaskSchema::Term), DataError);

  std::istringstream dup_ids(R"({"id":"a","text":"x y","anchors":{"TERM":[0,1]},"label":"l"}
{"id":"a","text":"x y","anchors":{"TERM":[0,1]},"label":"l"}
)");
  CHECK_THROWS_AS(load_dataset_stream(dup_ids, TaskSchema::Term), DataError);

  std::istringstream expl_no_label(R"({"id":"a","text":"x y","anchors":{"TERM":[0,1]},"explanation":"the word \"x\" occurs before the term"}
)");
  CHECK_THROWS_AS(load_dataset_stream(expl_no_label, TaskSchema::Term), DataError);
}

TEST_CASE("label space is sorted and stable when derived from data") {
  std::istringstream in(R"({"id":"a","text":"x y","anchors":{"TERM":[0,1]},"label":"zebra"}
{"id":"b","text":"x y","anchors":{"TERM":[0,1]},"label":"apple"}
)");
  auto parts = load_dataset_stream(in, TaskSchema::Term);
  CHECK(parts.label_space.labels == std::vector<std::string>{"apple", "zebra"});
  CHECK(parts.label_space.index_of("zebra") == 1);
}

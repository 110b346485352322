#include <catch2/catch_amalgamated.hpp>

#include "longmt/prompts.hpp"
#include "test_util.hpp"

using namespace longmt;

namespace {

// Renders the stored golden template with the given substitutions — an
// independent path from prompts::render, used to pin prompt fidelity.
std::string golden_render(const std::string& file,
                          const std::vector<std::pair<std::string, std::string>>& subs) {
  std::string out = testutil::read_golden("prompts/" + file);
  for (const auto& [key, value] : subs) {
    const std::string needle = "{" + key + "}";
    std::size_t pos;
    while ((pos = out.find(needle)) != std::string::npos) {
      out.replace(pos, needle.size(), value);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("placeholder substitution") {
  CHECK(prompts::render("a {x} b {x} {y}", {{"x", "1"}, {"y", "2"}}) == "a 1 b 1 2");
  // Unknown braces — like the JSON examples inside templates — survive.
  CHECK(prompts::render("{\"k\": \"v\"} and {z}", {{"x", "1"}}) ==
        "{\"k\": \"v\"} and {z}");
}

TEST_CASE("every rendered prompt matches its golden template") {
  const std::string sentence = "The night held its breath.";
  const std::string translation = "夜晚屏住了呼吸。";
  const std::string feedback = "比喻可以更自然。";
  const std::string keyword_json = "{\"night\": \"夜晚\"}";
  const std::string process = "Attempt 0: ...";
  const std::string reference = "夜色屏息。";

  CHECK(std::string(prompts::kMiningSystem) == testutil::read_golden("prompts/mining_system.txt"));
  CHECK(prompts::mining_user(sentence) ==
        golden_render("mining_user.txt", {{"sentence", sentence}}));

  CHECK(std::string(prompts::kWordLevelSystem) ==
        testutil::read_golden("prompts/word_level_system.txt"));
  CHECK(prompts::word_level_user(sentence) ==
        golden_render("word_level_user.txt", {{"sentence", sentence}}));

  CHECK(std::string(prompts::kPreliminarySystem) ==
        testutil::read_golden("prompts/preliminary_system.txt"));
  CHECK(prompts::preliminary_user(sentence, keyword_json) ==
        golden_render("preliminary_user.txt",
                      {{"sentence", sentence}, {"keyword translation", keyword_json}}));

  CHECK(std::string(prompts::kAdvisorSystem) ==
        testutil::read_golden("prompts/advisor_system.txt"));
  CHECK(prompts::advisor_user_first(sentence, translation) ==
        golden_render("advisor_user_first.txt",
                      {{"sentence", sentence}, {"translation", translation}}));
  CHECK(prompts::advisor_user_update(translation) ==
        golden_render("advisor_user_update.txt", {{"translation", translation}}));

  CHECK(std::string(prompts::kEvaluatorSystem) ==
        testutil::read_golden("prompts/evaluator_system.txt"));
  CHECK(prompts::evaluator_user(sentence, translation, feedback) ==
        golden_render("evaluator_user_with_feedback.txt", {{"sentence", sentence},
                                                           {"translation", translation},
                                                           {"feedback", feedback}}));
  CHECK(prompts::evaluator_user(sentence, translation) ==
        golden_render("evaluator_user_plain.txt",
                      {{"sentence", sentence}, {"translation", translation}}));

  CHECK(prompts::refinement_user(feedback, 85) ==
        golden_render("refinement_user.txt", {{"feedback", feedback}, {"score", "85"}}));

  CHECK(prompts::reformulation_user(sentence, process) ==
        golden_render("reformulation_user.txt",
                      {{"sentence", sentence}, {"translation process", process}}));

  CHECK(prompts::grb(sentence, reference, translation) ==
        golden_render("grb.txt", {{"src", sentence}, {"ref", reference}, {"hyp", translation}}));
  CHECK(prompts::grf(sentence, translation) ==
        golden_render("grf.txt", {{"src", sentence}, {"hyp", translation}}));
}

TEST_CASE("grb and grf differ only by the reference line") {
  const std::string grb = testutil::read_golden("prompts/grb.txt");
  const std::string grf = testutil::read_golden("prompts/grf.txt");
  const std::string ref_line = "Chinese human reference: {ref}\n";
  const std::string with_ref_phrase = " with respect to the human reference";

  std::string stripped = grb;
  const auto line_pos = stripped.find(ref_line);
  REQUIRE(line_pos != std::string::npos);
  stripped.erase(line_pos, ref_line.size());
  const auto phrase_pos = stripped.find(with_ref_phrase);
  REQUIRE(phrase_pos != std::string::npos);
  stripped.erase(phrase_pos, with_ref_phrase.size());
  CHECK(stripped == grf);
}

TEST_CASE("evaluator rubric contains the score anchor lines") {
  const std::string rubric(prompts::kEvaluatorSystem);
  CHECK(rubric.find("90 points: Excellent translation") != std::string::npos);
  CHECK(rubric.find("a scale of 0 to 100") != std::string::npos);
  CHECK(rubric.find("{\"reason\": \"reason for the score\", \"score\": int}") !=
        std::string::npos);
}

TEST_CASE("mining prompt carries the literal no-figurative phrase") {
  CHECK(std::string(prompts::kMiningUser).find("no metaphors and no similes") !=
        std::string::npos);
}

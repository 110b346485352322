#pragma once

#include <map>
#include <string>
#include <string_view>

// Prompt templates for every agent role, rendered with simple {placeholder}
// substitution. The wording of these templates is load-bearing: response
// parsers key off it, and tests/golden/prompts/ holds byte-identical copies
// that the test suite checks renders against. Do not reflow or "fix" them.

namespace longmt::prompts {

inline constexpr std::string_view kMiningSystem = R"tmpl(You are assigned to translate an English literary work into Chinese. The text may include descriptions or expressions that embody English cultural nuances, which may not resonate with Chinese language habits. In such instances, a literal translation may not be appropriate; instead, these sentences should be paraphrased to convey their intended meaning effectively.)tmpl";

inline constexpr std::string_view kMiningUser = R"tmpl(The English sentence is provided as follows:
<english sentence>
{sentence}
</english sentence>

Please begin by assessing whether the English sentence contains any metaphors or similes. If there are none, respond with "no metaphors and no similes."

If the English sentence does contain metaphors or similes, provide a literal translation of them, and then evaluate whether the literal translation is appropriate and easy for Chinese natives to understand.

If it is suitable, format your response as follows (two lines):
"your literal translation for metaphors/similes here (in Chinese)"
"suitable"

If it is unsuitable, please provide the reason for the unsuitability. Format your response as follows (three lines):
"your literal translation for metaphors/similes here (in Chinese)"
"unsuitable"
"reason for unsuitability here (in Chinese)")tmpl";

inline constexpr std::string_view kWordLevelSystem = R"tmpl(Given an English sentence, identify the important words (usually nouns, verbs, technical terms, and named entities that require special attention in translation) and translate them into Chinese. Output the translations in JSON format, for example:

{"EnglishWord1": "ChineseTranslation", "EnglishWord2": "ChineseTranslation"}

The Chinese translations can be a single translation or multiple options as deemed appropriate.)tmpl";

inline constexpr std::string_view kWordLevelUser = R"tmpl(<English Sentence>
{sentence}
</English Sentence>)tmpl";

inline constexpr std::string_view kPreliminarySystem = R"tmpl(Given an English sentence and a JSON object containing potential translations of important keywords, produce a Chinese literal translation of the entire sentence. Please directly output the Chinese translation without any descriptions.)tmpl";

inline constexpr std::string_view kPreliminaryUser = R"tmpl(<English Sentence>
{sentence}
</English Sentence>
<Potential Keyword Translation>
{keyword translation}
</Potential Keyword Translation>)tmpl";

inline constexpr std::string_view kAdvisorSystem = R"tmpl(Please rate the Chinese translation of the following English text and provide your comments and suggestions.)tmpl";

inline constexpr std::string_view kAdvisorUserFirst = R"tmpl(<English Text>
{sentence}
</English Text>
<Chinese Translation>
{translation}
</Chinese Translation>)tmpl";

inline constexpr std::string_view kAdvisorUserUpdate = R"tmpl(Here is the updated translation:
<Chinese Translation>
{translation}
</Chinese Translation>)tmpl";

inline constexpr std::string_view kEvaluatorSystem = R"tmpl(Please evaluate the following Chinese translation of an English text. Rate the translation on a scale of 0 to 100, where:
- 10 points: Poor translation; the text is somewhat understandable but contains significant errors and awkward phrasing that greatly hinder comprehension for a Chinese reader.
- 30 points: Fair translation; the text conveys the basic meaning but lacks fluency and contains several awkward phrases or inaccuracies, making it challenging for a Chinese reader to fully grasp the intended message.
- 50 points: Good translation; the text is mostly fluent and conveys the original meaning well, but may have minor awkwardness or slight inaccuracies that could confuse a Chinese reader.
- 70 points: Very good translation; the text is smooth and natural, effectively conveying the intended meaning, but may still have minor issues that could slightly affect understanding for a Chinese reader.
- 90 points: Excellent translation; the text is fluent and natural, conveying the original meaning clearly and effectively, with no significant issues that would hinder understanding for a Chinese reader.

Please provide the reason first, followed by a score. Format your evaluation in the JSON structure below:
{"reason": "reason for the score", "score": int})tmpl";

inline constexpr std::string_view kEvaluatorUserWithFeedback = R"tmpl(<English Text>
{sentence}
</English Text>
<Chinese Translation>
{translation}
</Chinese Translation>
<Advisor Feedback>
{feedback}
</Advisor Feedback>)tmpl";

inline constexpr std::string_view kEvaluatorUserPlain = R"tmpl(<English Text>
{sentence}
</English Text>
<Chinese Translation>
{translation}
</Chinese Translation>)tmpl";

inline constexpr std::string_view kRefinementUser = R"tmpl(Feedback: {feedback}
Overall score: {score}/100
Please provide an improved Chinese translation. Output only the translation.)tmpl";

inline constexpr std::string_view kReformulationUser = R"tmpl(A student is engaged in the task of translating an English sentence into Chinese.

The English sentence is as follows:
<English Sentence>
{sentence}
</English Sentence>

This student constantly thinks about and optimizes his translation. The whole process is shown as follows:

<Translation Process>
{translation process}
</Translation Process>

Please polish the whole translation process into a long first-person self-reflection description (use the present tense).

The self-reflection should begin with selecting the keywords from the English sentence, translating the keywords, and then attempt to translate the whole sentence, and then think about whether the translation is good or not, and iteratively make translation attempts. Finally, make a final translation decision.

Output the self-reflection description directly without any additional descriptions or explanations. Each line in the self-reflection description can be regarded as a reasoning step to the translation.)tmpl";

inline constexpr std::string_view kGrb = R"tmpl(Score the following translation from English to Chinese with respect to the human reference on a continuous scale from 0 to 100, where score of zero means "no meaning preserved" and score of one hundred means "perfect preservation of meaning, with faithfulness, expressiveness, and elegance".

English source: {src}
Chinese human reference: {ref}
Chinese translation: {hyp}

Score:)tmpl";

inline constexpr std::string_view kGrf = R"tmpl(Score the following translation from English to Chinese on a continuous scale from 0 to 100, where score of zero means "no meaning preserved" and score of one hundred means "perfect preservation of meaning, with faithfulness, expressiveness, and elegance".

English source: {src}
Chinese translation: {hyp}

Score:)tmpl";

using Values = std::map<std::string, std::string>;

// Replaces each "{key}" occurrence for keys present in `values`. Braces
// that do not spell a known placeholder (e.g. the JSON examples inside the
// templates) are left untouched.
inline std::string render(std::string_view tmpl, const Values& values) {
  std::string out(tmpl);
  for (const auto& [key, value] : values) {
    const std::string needle = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = out.find(needle, pos)) != std::string::npos) {
      out.replace(pos, needle.size(), value);
      pos += value.size();
    }
  }
  return out;
}

inline std::string mining_user(const std::string& sentence) {
  return render(kMiningUser, {{"sentence", sentence}});
}

inline std::string word_level_user(const std::string& sentence) {
  return render(kWordLevelUser, {{"sentence", sentence}});
}

inline std::string preliminary_user(const std::string& sentence,
                                    const std::string& keyword_json) {
  return render(kPreliminaryUser,
                {{"sentence", sentence}, {"keyword translation", keyword_json}});
}

inline std::string advisor_user_first(const std::string& sentence,
                                      const std::string& translation) {
  return render(kAdvisorUserFirst,
                {{"sentence", sentence}, {"translation", translation}});
}

inline std::string advisor_user_update(const std::string& translation) {
  return render(kAdvisorUserUpdate, {{"translation", translation}});
}

inline std::string evaluator_user(const std::string& sentence,
                                  const std::string& translation) {
  return render(kEvaluatorUserPlain,
                {{"sentence", sentence}, {"translation", translation}});
}

inline std::string evaluator_user(const std::string& sentence,
                                  const std::string& translation,
                                  const std::string& feedback) {
  return render(kEvaluatorUserWithFeedback, {{"sentence", sentence},
                                             {"translation", translation},
                                             {"feedback", feedback}});
}

inline std::string refinement_user(const std::string& feedback, int score) {
  return render(kRefinementUser,
                {{"feedback", feedback}, {"score", std::to_string(score)}});
}

inline std::string reformulation_user(const std::string& sentence,
                                      const std::string& process) {
  return render(kReformulationUser,
                {{"sentence", sentence}, {"translation process", process}});
}

inline std::string grb(const std::string& src, const std::string& ref,
                       const std::string& hyp) {
  return render(kGrb, {{"src", src}, {"ref", ref}, {"hyp", hyp}});
}

inline std::string grf(const std::string& src, const std::string& hyp) {
  return render(kGrf, {{"src", src}, {"hyp", hyp}});
}

}  // namespace longmt::prompts

#include "cyfunnel/dataset.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace cyfunnel;

namespace {

std::vector<QuestionRecord> load_text(const std::string& text) {
  std::istringstream in(text);
  return load_dataset_stream(in);
}

const char* kGoodLine =
    R"({"question_id":"q1","question":"who?","gold_query":"MATCH (n) RETURN n",)"
    R"("schema":"(:A)-[:R]->(:B)","traces":[{"trace_id":"t0","text":"MATCH (n) RETURN n",)"
    R"("tokens":[{"topk_logprobs":[-0.1,-1.5]}]}]})";

}  // namespace

TEST(Dataset, SingleRecordRoundTrip) {
  auto records = load_text(std::string(kGoodLine) + "\n");
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].question_id, "q1");
  EXPECT_EQ(records[0].gold_query, "MATCH (n) RETURN n");
  ASSERT_EQ(records[0].traces.size(), 1u);
  EXPECT_EQ(records[0].traces[0].tokens[0].topk_logprobs.size(), 2u);

  std::ostringstream out;
  save_dataset_stream(records, out);
  auto again = load_text(out.str());
  EXPECT_EQ(records, again);
}

TEST(Dataset, EmptyFileGivesEmptyList) {
  EXPECT_TRUE(load_text("").empty());
  EXPECT_TRUE(load_text("\n\n  \n").empty());
}

TEST(Dataset, MissingGoldQueryNamesFieldAndLine) {
  const char* line =
      R"({"question_id":"q1","question":"who?","schema":"s","traces":[]})";
  try {
    load_text(line);
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("gold_query"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
  }
}

TEST(Dataset, MalformedJsonReportsLineAndOffset) {
  std::string text = std::string(kGoodLine) + "\n{not json}\n";
  try {
    load_text(text);
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("byte offset"), std::string::npos) << msg;
  }
}

TEST(Dataset, WrongFieldTypeIsALoadError) {
  const char* line =
      R"({"question_id":7,"question":"q","gold_query":"g","schema":"s","traces":[]})";
  EXPECT_THROW(load_text(line), DatasetError);
}

TEST(Dataset, PositiveLogprobRejected) {
  std::string line = kGoodLine;
  auto pos = line.find("-0.1");
  line.replace(pos, 4, "0.25");
  EXPECT_THROW(load_text(line), DatasetError);
}

TEST(Dataset, UnsortedLogprobsRejected) {
  std::string line = kGoodLine;
  auto pos = line.find("[-0.1,-1.5]");
  line.replace(pos, 11, "[-1.5,-0.1]");
  EXPECT_THROW(load_text(line), DatasetError);
}

TEST(Dataset, EmptyTokensWithTextRejected) {
  const char* line =
      R"({"question_id":"q1","question":"q","gold_query":"g","schema":"s",)"
      R"("traces":[{"trace_id":"t0","text":"MATCH (n) RETURN n","tokens":[]}]})";
  EXPECT_THROW(load_text(line), DatasetError);
}

TEST(Dataset, EmptyGenerationIsAllowed) {
  const char* line =
      R"({"question_id":"q1","question":"q","gold_query":"g","schema":"s",)"
      R"("traces":[{"trace_id":"t0","text":"","tokens":[]}]})";
  auto records = load_text(line);
  EXPECT_TRUE(records[0].traces[0].tokens.empty());
}

TEST(Dataset, DuplicateQuestionIdRejected) {
  std::string text = std::string(kGoodLine) + "\n" + kGoodLine + "\n";
  EXPECT_THROW(load_text(text), DatasetError);
}

TEST(Dataset, SchemaArrayFormAccepted) {
  const char* line =
      R"({"question_id":"q1","question":"q","gold_query":"g",)"
      R"("schema":[{"source":"Person","type":"ACTED_IN","target":"Movie"}],)"
      R"("traces":[]})";
  auto records = load_text(line);
  EXPECT_EQ(records[0].schema_text, "(:Person)-[:ACTED_IN]->(:Movie)");
}

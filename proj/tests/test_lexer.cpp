#include "cyfunnel/lexer.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <string>

#include "test_paths.hpp"

using namespace cyfunnel;

TEST(Lexer, MinimalQuery) {
  auto r = tokenize("MATCH (n)");
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.tokens.size(), 4u);
  EXPECT_EQ(r.tokens[0].kind, TokenKind::Keyword);
  EXPECT_EQ(r.tokens[0].text, "MATCH");
  EXPECT_EQ(r.tokens[1].text, "(");
  EXPECT_EQ(r.tokens[2].kind, TokenKind::Identifier);
  EXPECT_EQ(r.tokens[3].text, ")");
}

TEST(Lexer, ParenInsideStringIsNotASymbol) {
  auto r = tokenize("RETURN 'a)b'");
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.tokens.size(), 2u);
  EXPECT_EQ(r.tokens[1].kind, TokenKind::String);
  EXPECT_EQ(r.tokens[1].text, "'a)b'");
}

TEST(Lexer, BlockCommentSkipped) {
  auto r = tokenize("MATCH /* c */ (n)");
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.tokens.size(), 4u);
  EXPECT_EQ(r.tokens[0].text, "MATCH");
  EXPECT_EQ(r.tokens[1].text, "(");
}

TEST(Lexer, LineCommentSkipped) {
  auto r = tokenize("RETURN n // trailing\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.tokens.size(), 2u);
}

TEST(Lexer, KeywordsCaseInsensitive) {
  auto r = tokenize("match (n) rEtUrN n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.tokens[0].kind, TokenKind::Keyword);
  EXPECT_EQ(r.tokens[0].text, "match");  // original spelling kept
  EXPECT_EQ(r.tokens[4].kind, TokenKind::Keyword);
}

TEST(Lexer, NumbersAndRanges) {
  auto r = tokenize("1 2.5 1e3 1.5e-2 1..3");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.tokens[0].kind, TokenKind::Integer);
  EXPECT_EQ(r.tokens[1].kind, TokenKind::Float);
  EXPECT_EQ(r.tokens[2].kind, TokenKind::Float);
  EXPECT_EQ(r.tokens[3].kind, TokenKind::Float);
  EXPECT_EQ(r.tokens[4].kind, TokenKind::Integer);
  EXPECT_EQ(r.tokens[5].text, "..");
  EXPECT_EQ(r.tokens[6].kind, TokenKind::Integer);
}

TEST(Lexer, ParametersAndBackticks) {
  auto r = tokenize("$p `my var` $0");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.tokens[0].kind, TokenKind::Parameter);
  EXPECT_EQ(r.tokens[1].kind, TokenKind::Identifier);
  EXPECT_EQ(r.tokens[1].text, "`my var`");
  EXPECT_EQ(r.tokens[2].kind, TokenKind::Parameter);
}

TEST(Lexer, UnterminatedStringDiagnostic) {
  auto r = tokenize("RETURN 'abc");
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.errors[0].pos.offset, 7u);
  EXPECT_NE(r.errors[0].message.find("unterminated string"), std::string::npos);
}

TEST(Lexer, UnterminatedCommentDiagnostic) {
  auto r = tokenize("MATCH (n) /* hm");
  ASSERT_FALSE(r.ok());
  EXPECT_NE(r.errors[0].message.find("comment"), std::string::npos);
}

TEST(Lexer, UnterminatedBacktickDiagnostic) {
  auto r = tokenize("RETURN `abc");
  ASSERT_FALSE(r.ok());
}

TEST(Lexer, InvalidUtf8IsALexicalError) {
  std::string bad = "MATCH (n) RETURN '\xFF\xFE'";
  auto r = tokenize(bad);
  EXPECT_FALSE(r.ok());
  EXPECT_NE(r.errors[0].message.find("UTF-8"), std::string::npos);
}

TEST(Lexer, ValidUtf8IdentifiersPass) {
  auto r = tokenize("MATCH (caf\xC3\xA9) RETURN caf\xC3\xA9");
  EXPECT_TRUE(r.ok());
}

TEST(Lexer, PositionsTrackLinesAndColumns) {
  auto r = tokenize("MATCH (n)\nRETURN n");
  ASSERT_TRUE(r.ok());
  const auto& ret = r.tokens[4];
  EXPECT_EQ(ret.text, "RETURN");
  EXPECT_EQ(ret.pos.line, 2);
  EXPECT_EQ(ret.pos.column, 1);
  EXPECT_EQ(ret.pos.offset, 10u);
}

TEST(Lexer, UnquoteName) {
  EXPECT_EQ(unquote_name("plain"), "plain");
  EXPECT_EQ(unquote_name("`My Label`"), "My Label");
  EXPECT_EQ(unquote_name("`a``b`"), "a`b");
}

// Splicing token texts back into the gaps reproduces the input byte for byte.
TEST(Lexer, ReconstructionOverCorpus) {
  std::ifstream in(test_data_path("corpus_valid.txt"));
  ASSERT_TRUE(in.is_open());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto r = tokenize(line);
    ASSERT_TRUE(r.ok()) << line;
    std::string rebuilt;
    std::size_t cursor = 0;
    for (const auto& tok : r.tokens) {
      rebuilt += line.substr(cursor, tok.pos.offset - cursor);
      rebuilt += tok.text;
      cursor = tok.pos.offset + tok.text.size();
    }
    rebuilt += line.substr(cursor);
    EXPECT_EQ(rebuilt, line);
  }
}

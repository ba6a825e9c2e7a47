#include <random>
#include <string>

#include <gtest/gtest.h>

#include "capfix/subtitle_io.hpp"
#include "support/oracles.hpp"

namespace capfix {
namespace {

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::EmptyInput;
}

TEST(ParseSrt, SingleBlock) {
  const auto t = parse_srt("1\n00:00:01,000 --> 00:00:02,500\nhello world\n\n");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.cues[0], (Cue{1, 1000, 2500, "hello world"}));
  EXPECT_EQ(t.source_format, SourceFormat::Srt);
}

TEST(ParseSrt, EmptyInput) {
  EXPECT_EQ(error_of([] { parse_srt(""); }), Errc::EmptyInput);
  EXPECT_EQ(error_of([] { parse_srt("\xEF\xBB\xBF\n \n"); }), Errc::EmptyInput);
}

TEST(ParseSrt, TwoBlocksHandParsed) {
  // Expected cues written out by hand from the fixture text.
  const auto t = parse_srt(
      "1\n00:00:01,000 --> 00:00:02,000\nI was walkng\n\n"
      "2\n00:00:02,000 --> 00:00:03,500\nin the son\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.cues[0], (Cue{1, 1000, 2000, "I was walkng"}));
  EXPECT_EQ(t.cues[1], (Cue{2, 2000, 3500, "in the son"}));
  EXPECT_LE(t.cues[0].start, t.cues[1].start);
}

TEST(ParseSrt, CrlfBomMultilineAndRenumbering) {
  const auto t = parse_srt(
      "\xEF\xBB\xBF"
      "5\r\n01:02:03,004 --> 01:02:04,000 X1:10\r\n  first line \r\nsecond line\r\n\r\n\r\n"
      "9\r\n01:02:05,000 --> 01:02:06,000\r\nthird\r\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.cues[0].index, 1u);
  EXPECT_EQ(t.cues[0].start, 3723004);
  EXPECT_EQ(t.cues[0].text, "first line\nsecond line");
  EXPECT_EQ(t.cues[1].index, 2u);
}

TEST(ParseSrt, Errors) {
  EXPECT_EQ(error_of([] { parse_srt("1\n00:00:01.000 --> 00:00:02,000\nx\n"); }), Errc::MalformedTimestamp);
  EXPECT_EQ(error_of([] { parse_srt("1\n00:61:01,000 --> 00:00:02,000\nx\n"); }), Errc::MalformedTimestamp);
  EXPECT_EQ(error_of([] { parse_srt("1\n00:00:03,000 --> 00:00:02,000\nx\n"); }), Errc::MalformedTimestamp);
  EXPECT_EQ(error_of([] { parse_srt("1\n"); }), Errc::MalformedTimestamp);
  EXPECT_EQ(error_of([] { parse_srt("one\n00:00:01,000 --> 00:00:02,000\nx\n"); }), Errc::MalformedIndex);
  EXPECT_EQ(error_of([] {
              parse_srt("2\n00:00:01,000 --> 00:00:02,000\nx\n\n2\n00:00:03,000 --> 00:00:04,000\ny\n");
            }),
            Errc::NonMonotonicIndex);
  EXPECT_EQ(error_of([] {
              parse_srt("1\n00:00:05,000 --> 00:00:06,000\nx\n\n2\n00:00:03,000 --> 00:00:04,000\ny\n");
            }),
            Errc::NonMonotonicTime);
}

TEST(ParseSrt, DiagnosticNamesLineAndToken) {
  try {
    parse_srt("1\n00:00:01,000 --> 00:00:02,000\nx\n\n2\n00:00:0x,000 --> 00:00:04,000\ny\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.line(), 6u);
    EXPECT_NE(std::string(e.what()).find("00:00:0x,000"), std::string::npos);
  }
}

TEST(ParseVtt, Minimal) {
  const auto t = parse_vtt("WEBVTT\n\n00:00:00.000 --> 00:00:01.000\nhi\n");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.cues[0], (Cue{1, 0, 1000, "hi"}));
}

TEST(ParseVtt, MissingHeader) {
  EXPECT_EQ(error_of([] { parse_vtt("00:00:00.000 --> 00:00:01.000\nhi\n"); }), Errc::MissingHeader);
  EXPECT_EQ(error_of([] { parse_vtt("WEBVTTX\n\n00:00:00.000 --> 00:00:01.000\nhi\n"); }), Errc::MissingHeader);
}

TEST(ParseVtt, StripsVoiceTag) {
  const auto t = parse_vtt("WEBVTT\n\n00:00:00.000 --> 00:00:01.000\n<v Anna>hello</v>\n");
  EXPECT_EQ(t.cues.at(0).text, "hello");
}

TEST(ParseVtt, SkipsNotesStylesIdentifiersAndSettings) {
  const auto t = parse_vtt(
      "WEBVTT - captions\nKind: captions\n\n"
      "NOTE this is\na comment\n\n"
      "STYLE\n::cue { color: red }\n\n"
      "intro\n00:01.500 --> 00:02.000 align:start position:10%\n<c.loud>Tom &amp; <i>Jerry</i></c>\n\n"
      "01:00:00.000 --> 01:00:01.000\nline one\nline two\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.cues[0], (Cue{1, 1500, 2000, "Tom & Jerry"}));
  EXPECT_EQ(t.cues[1], (Cue{2, 3600000, 3601000, "line one\nline two"}));
}

TEST(ParseVtt, MalformedTimestamp) {
  EXPECT_EQ(error_of([] { parse_vtt("WEBVTT\n\n00:00:00,000 --> 00:00:01.000\nhi\n"); }), Errc::MalformedTimestamp);
  EXPECT_EQ(error_of([] { parse_vtt("WEBVTT\n\njust text\n"); }), Errc::MalformedTimestamp);
}

TEST(ParseYoutubeJson, UnitConversion) {
  const auto t = parse_youtube_json(R"([{"text":"hi","start":0.0,"duration":1.2}])");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.cues[0], (Cue{1, 0, 1200, "hi"}));
}

TEST(ParseYoutubeJson, EmptyArrayIsValid) { EXPECT_TRUE(parse_youtube_json("[]").empty()); }

TEST(ParseYoutubeJson, MissingField) {
  try {
    parse_youtube_json(R"([{"text":"hi","start":0.0}])");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingField);
    EXPECT_NE(std::string(e.what()).find("duration"), std::string::npos);
  }
}

TEST(ParseYoutubeJson, MalformedAndHalfUpRounding) {
  EXPECT_EQ(error_of([] { parse_youtube_json("[{"); }), Errc::MalformedJson);
  EXPECT_EQ(error_of([] { parse_youtube_json(R"({"text":"x"})"); }), Errc::MalformedJson);
  EXPECT_EQ(error_of([] { parse_youtube_json(R"([{"text":1,"start":0,"duration":1}])"); }), Errc::MalformedJson);
  const auto t = parse_youtube_json(R"([{"text":"a\nb ","start":1.0005,"duration":0.0015},
                                        {"text":"c","start":2.0625,"duration":0.5}])");
  EXPECT_EQ(t.cues[0], (Cue{1, 1001, 1002, "a\nb"}));
  EXPECT_EQ(t.cues[1].start, 2063);
  EXPECT_EQ(seconds_to_millis(0.0004), 0);
  EXPECT_EQ(seconds_to_millis(0.0005), 1);
}

TEST(SerializeSrt, InverseOfParseExample) {
  Transcript t{{{1, 1000, 2500, "hello world"}}, SourceFormat::Srt};
  EXPECT_EQ(serialize_srt(t), "1\n00:00:01,000 --> 00:00:02,500\nhello world\n\n");
  EXPECT_EQ(serialize_srt(Transcript{}), "");
}

TEST(SerializeSrt, RejectsInvalidTranscript) {
  Transcript bad{{{1, 2000, 1000, "x"}}, SourceFormat::Srt};
  EXPECT_EQ(error_of([&] { serialize_srt(bad); }), Errc::InvalidTranscript);
  Transcript gap{{{2, 0, 1000, "x"}}, SourceFormat::Srt};
  EXPECT_EQ(error_of([&] { serialize_srt(gap); }), Errc::InvalidTranscript);
}

TEST(SerializeSrt, RoundTripProperty) {
  std::mt19937 rng(20240501);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = oracle::random_transcript(rng, 50);
    EXPECT_EQ(parse_srt(serialize_srt(t)), t) << "trial " << trial;
  }
}

TEST(SerializeSrt, CueWithEmptyTextRoundTrips) {
  Transcript t{{{1, 0, 10, "a"}, {2, 10, 20, ""}, {3, 20, 30, "b"}}, SourceFormat::Srt};
  EXPECT_EQ(parse_srt(serialize_srt(t)), t);
}

TEST(Flatten, Examples) {
  EXPECT_EQ(flatten(Transcript{{{1, 0, 1, "hello"}, {2, 1, 2, "world"}}}), "hello world");
  EXPECT_EQ(flatten(Transcript{{{1, 0, 1, "a\nb"}, {2, 1, 2, "c"}}}), "a b c");
  EXPECT_EQ(flatten(Transcript{}), "");
}

TEST(Flatten, NeverDoubleSpacedOrPadded) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = oracle::random_transcript(rng, 10);
    t.cues.front().text = "  \t" + t.cues.front().text + "\n\n ";
    const auto flat = flatten(t);
    EXPECT_EQ(flat.find("  "), std::string::npos);
    EXPECT_NE(flat.front(), ' ');
    EXPECT_NE(flat.back(), ' ');
    EXPECT_EQ(flat.find('\n'), std::string::npos);
  }
}

}  // namespace
}  // namespace capfix

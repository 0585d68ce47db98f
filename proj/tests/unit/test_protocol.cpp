#include <gtest/gtest.h>

#include "tailsim/errors.hpp"
#include "tailsim/protocol.hpp"

using namespace tailsim;
using namespace tailsim::protocol;

TEST(Protocol, FrameHeaderIsBigEndian) {
  const std::string payload(0x0102, 'x');
  const auto frame = encode_frame(payload);
  ASSERT_EQ(frame.size(), payload.size() + 4);
  EXPECT_EQ(frame[0], 0);
  EXPECT_EQ(frame[1], 0);
  EXPECT_EQ(frame[2], 1);
  EXPECT_EQ(frame[3], 2);
}

TEST(Protocol, DecoderHandlesSplitsAndBatches) {
  const auto stream = encode_frame("{\"a\":1}") + encode_frame("") + encode_frame("hello");
  FrameDecoder d;
  std::vector<std::string> got;
  for (char c : stream) {
    d.feed(&c, 1);
    while (auto p = d.next()) got.push_back(*p);
  }
  EXPECT_EQ(got, (std::vector<std::string>{"{\"a\":1}", "", "hello"}));

  FrameDecoder all;
  all.feed(stream.data(), stream.size());
  EXPECT_EQ(*all.next(), "{\"a\":1}");
  EXPECT_EQ(*all.next(), "");
  EXPECT_EQ(*all.next(), "hello");
  EXPECT_FALSE(all.next());
}

TEST(Protocol, OversizedFrameRejected) {
  FrameDecoder d;
  const char header[4] = {0x7f, 0, 0, 0};
  d.feed(header, 4);
  EXPECT_THROW(d.next(), ParseError);
}

TEST(Protocol, ParseClientMessage) {
  const auto m = parse_client_message(R"({"v":1,"type":"pull_test","tag":{"id":7}})");
  EXPECT_EQ(m.type, MessageType::PullTest);
  EXPECT_EQ(m.tag["id"], 7);
  EXPECT_EQ(to_string(m.type), "pull_test");
  for (auto t : {"set_wires", "place_object", "clear_object", "load_scenario"}) {
    const auto x = parse_client_message(std::string(R"({"v":1,"type":")") + t + "\"}");
    EXPECT_EQ(to_string(x.type), t);
    EXPECT_TRUE(x.tag.is_null());
  }
}

TEST(Protocol, EnvelopeErrors) {
  EXPECT_THROW(parse_client_message("nope"), ParseError);
  EXPECT_THROW(parse_client_message("[1]"), ParseError);
  EXPECT_THROW(parse_client_message(R"({"type":"set_wires"})"), ParseError);
  EXPECT_THROW(parse_client_message(R"({"v":2,"type":"set_wires"})"), ParseError);
  EXPECT_THROW(parse_client_message(R"({"v":1,"type":"dance"})"), ParseError);
  EXPECT_THROW(parse_client_message(R"({"v":1})"), ParseError);
  EXPECT_EQ(extract_tag(R"({"v":9,"tag":"abc"})"), "abc");
  EXPECT_TRUE(extract_tag("garbage").is_null());
}

TEST(Protocol, ServerMessages) {
  const auto env = envelope("state", 4, "t1");
  EXPECT_EQ(env["v"], 1);
  EXPECT_EQ(env["type"], "state");
  EXPECT_EQ(env["revision"], 4);
  EXPECT_EQ(env["tag"], "t1");
  EXPECT_FALSE(envelope("state", 0, nullptr).contains("tag"));
  const auto err = nlohmann::json::parse(error_message(2, nullptr, "bad_request", "why"));
  EXPECT_EQ(err["type"], "error");
  EXPECT_EQ(err["code"], "bad_request");
  EXPECT_EQ(err["message"], "why");
}

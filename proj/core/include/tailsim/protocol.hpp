#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tailsim::protocol {

inline constexpr int kVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = 16u << 20;
inline constexpr double kWireLimitMm = 80.0;
inline constexpr int kWireCount = 5;

// 4-byte big-endian length followed by that many bytes of UTF-8 JSON.
std::string encode_frame(std::string_view payload);

// Incremental frame splitter for a byte stream.
class FrameDecoder {
 public:
  void feed(const char* data, std::size_t size);
  // Next complete payload, if any. Throws ParseError on an oversized frame.
  std::optional<std::string> next();

 private:
  std::string buffer_;
};

enum class MessageType { SetWires, PlaceObject, ClearObject, PullTest, LoadScenario };

std::string_view to_string(MessageType type);

struct ClientMessage {
  MessageType type = MessageType::SetWires;
  nlohmann::json tag;  // echoed verbatim; null when absent
  nlohmann::json body; // the whole message
};

// Validates the envelope ("v", "type", "tag"). Payload checks happen in the
// session. Throws ParseError with a client-facing message.
ClientMessage parse_client_message(std::string_view text);

// Best-effort tag recovery for error replies to malformed messages.
nlohmann::json extract_tag(std::string_view text);

// Server envelope: {"v":1, "type", "revision", "tag"?} plus payload fields.
nlohmann::ordered_json envelope(std::string_view type, std::uint64_t revision,
                                const nlohmann::json& tag);

std::string error_message(std::uint64_t revision, const nlohmann::json& tag, std::string_view code,
                          std::string_view text);

}  // namespace tailsim::protocol

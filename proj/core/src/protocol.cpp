#include "tailsim/protocol.hpp"

#include "tailsim/errors.hpp"

namespace tailsim::protocol {

using nlohmann::json;
using nlohmann::ordered_json;

std::string encode_frame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) throw InvalidArgument("frame too large");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(payload.size() + 4);
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out.append(payload);
  return out;
}

void FrameDecoder::feed(const char* data, std::size_t size) { buffer_.append(data, size); }

std::optional<std::string> FrameDecoder::next() {
  if (buffer_.size() < 4) return std::nullopt;
  const auto byte = [&](int i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer_[i])); };
  const std::uint32_t n = (byte(0) << 24) | (byte(1) << 16) | (byte(2) << 8) | byte(3);
  if (n > kMaxFrameBytes) throw ParseError("frame of " + std::to_string(n) + " bytes exceeds the limit");
  if (buffer_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  std::string payload = buffer_.substr(4, n);
  buffer_.erase(0, 4 + static_cast<std::size_t>(n));
  return payload;
}

std::string_view to_string(MessageType type) {
  switch (type) {
    case MessageType::SetWires: return "set_wires";
    case MessageType::PlaceObject: return "place_object";
    case MessageType::ClearObject: return "clear_object";
    case MessageType::PullTest: return "pull_test";
    case MessageType::LoadScenario: return "load_scenario";
  }
  return "set_wires";
}

ClientMessage parse_client_message(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error&) {
    throw ParseError("message is not valid JSON");
  }
  if (!doc.is_object()) throw ParseError("message must be a JSON object");
  ClientMessage out;
  if (doc.contains("tag")) out.tag = doc["tag"];
  if (!doc.contains("v") || !doc["v"].is_number_integer() || doc["v"].get<int>() != kVersion) {
    throw ParseError("unsupported or missing protocol version (expected \"v\": 1)");
  }
  if (!doc.contains("type") || !doc["type"].is_string()) throw ParseError("missing message type");
  const auto type = doc["type"].get<std::string>();
  if (type == "set_wires") {
    out.type = MessageType::SetWires;
  } else if (type == "place_object") {
    out.type = MessageType::PlaceObject;
  } else if (type == "clear_object") {
    out.type = MessageType::ClearObject;
  } else if (type == "pull_test") {
    out.type = MessageType::PullTest;
  } else if (type == "load_scenario") {
    out.type = MessageType::LoadScenario;
  } else {
    throw ParseError("unknown message type '" + type + "'");
  }
  out.body = std::move(doc);
  return out;
}

json extract_tag(std::string_view text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_object() && doc.contains("tag")) return doc["tag"];
  return nullptr;
}

ordered_json envelope(std::string_view type, std::uint64_t revision, const json& tag) {
  ordered_json out;
  out["v"] = kVersion;
  out["type"] = std::string(type);
  out["revision"] = revision;
  if (!tag.is_null()) out["tag"] = tag;
  return out;
}

std::string error_message(std::uint64_t revision, const json& tag, std::string_view code,
                          std::string_view text) {
  auto out = envelope("error", revision, tag);
  out["code"] = std::string(code);
  out["message"] = std::string(text);
  return out.dump();
}

}  // namespace tailsim::protocol

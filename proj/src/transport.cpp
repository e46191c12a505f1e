#include "histcad/nlt.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <cstdlib>

namespace histcad {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 15];
    }
    return out;
}

std::string api_key_from_environment() {
    const char* key = std::getenv("HISTCAD_API_KEY");
    return key == nullptr ? std::string() : std::string(key);
}

HttpChatTransport::HttpChatTransport(std::string endpoint, std::string api_key, int timeout_seconds)
    : api_key_(std::move(api_key)), timeout_seconds_(timeout_seconds) {
    const auto scheme = endpoint.find("://");
    if (scheme == std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "endpoint must be an http:// or https:// URL: " + endpoint);
    }
    const auto slash = endpoint.find('/', scheme + 3);
    base_ = endpoint.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : endpoint.substr(slash);
}

std::string HttpChatTransport::complete(const ChatRequest& request) {
    httplib::Client client(base_);
    client.set_connection_timeout(timeout_seconds_);
    client.set_read_timeout(timeout_seconds_);
    client.set_write_timeout(timeout_seconds_);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    const auto res = client.Post(path_, headers, chat_request_body(request), "application/json");
    if (!res) throw TransportFailure("request failed: " + httplib::to_string(res.error()), true);
    if (res->status == 429 || res->status >= 500) {
        throw TransportFailure("HTTP " + std::to_string(res->status), true);
    }
    if (res->status < 200 || res->status >= 300) {
        throw TransportFailure("HTTP " + std::to_string(res->status), false);
    }
    return parse_chat_response(res->body);
}

}  // namespace histcad

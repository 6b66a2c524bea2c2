#include "tsci/advisor.hpp"

#include <httplib.h>

#include <fmt/format.h>

#include <cstdlib>
#include <regex>

namespace tsci {

namespace {

struct EndpointParts {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

EndpointParts split_endpoint(const std::string& url) {
    static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, pattern)) throw std::invalid_argument(fmt::format("malformed endpoint URL '{}'", url));
    return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

class HttpChatTransport final : public ChatTransport {
public:
    explicit HttpChatTransport(const AdvisorBackend& backend) : backend_(backend), parts_(split_endpoint(backend.endpoint)) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (parts_.origin.rfind("https://", 0) == 0)
            throw std::invalid_argument("https endpoints need a build with OpenSSL support");
#endif
    }

    std::string send(const nlohmann::json& request) override {
        httplib::Client client(parts_.origin);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(backend_.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(backend_.timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());

        httplib::Headers headers;
        if (const char* cred = std::getenv(backend_.credential_env.c_str()); cred != nullptr && *cred != '\0')
            headers.emplace("Authorization", std::string("Bearer ") + cred);
        const auto res = client.Post(parts_.path, headers, request.dump(), "application/json");
        if (!res) throw TransportError(fmt::format("request failed: {}", httplib::to_string(res.error())));
        if (res->status != 200) throw TransportError(fmt::format("service answered HTTP {}", res->status));
        return res->body;
    }

private:
    AdvisorBackend backend_;
    EndpointParts parts_;
};

}  // namespace

std::unique_ptr<ChatTransport> make_http_transport(const AdvisorBackend& backend) {
    return std::make_unique<HttpChatTransport>(backend);
}

}  // namespace tsci

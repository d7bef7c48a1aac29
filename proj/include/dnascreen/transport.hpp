// Transport abstraction: services expose `json handle(path, body)` and talk
// to each other through a Channel. The in-memory implementation records every
// message for later inspection; an HTTP implementation with the same contract
// lives in http.hpp.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dnascreen/errors.hpp"

namespace dnascreen {

using json = nlohmann::json;

// A service endpoint: dispatches a request body for a given path.
using Handler = std::function<json(const std::string& path, const json& body)>;

class Channel {
  public:
    virtual ~Channel() = default;
    // Sends `body` to service `to` at `path` on behalf of `from`; returns the
    // response body. Errors surface as dnascreen::Error.
    virtual json call(const std::string& from, const std::string& to,
                      const std::string& path, const json& body) = 0;
};

// One recorded message (request or response) on the in-memory network.
struct TranscriptEntry {
    double time = 0;
    std::string from;
    std::string to;
    std::string path;
    std::string direction;  // "request" or "response"
    json body;

    json to_json() const {
        return json{{"time", time},   {"from", from},
                    {"to", to},       {"path", path},
                    {"direction", direction}, {"body", body}};
    }
};

using Transcript = std::vector<TranscriptEntry>;

// In-memory router: synchronous dispatch to registered handlers, with fault
// injection (dead targets refuse calls) and full message recording.
class MemoryChannel : public Channel {
  public:
    void register_service(const std::string& name, Handler h) {
        std::lock_guard<std::recursive_mutex> lk(mu_);
        services_[name] = std::move(h);
    }

    void set_dead(const std::string& name, bool dead) {
        std::lock_guard<std::recursive_mutex> lk(mu_);
        if (dead)
            dead_.insert(name);
        else
            dead_.erase(name);
    }

    bool is_dead(const std::string& name) const {
        std::lock_guard<std::recursive_mutex> lk(mu_);
        return dead_.count(name) > 0;
    }

    void set_clock(std::function<double()> clock) { clock_ = std::move(clock); }

    json call(const std::string& from, const std::string& to,
              const std::string& path, const json& body) override {
        Handler h;
        {
            std::lock_guard<std::recursive_mutex> lk(mu_);
            record(from, to, path, "request", body);
            if (dead_.count(to))
                throw Error(Err::ServerUnreachable, "server " + to + " is down");
            auto it = services_.find(to);
            if (it == services_.end())
                throw Error(Err::ServerUnreachable, "no such service " + to);
            h = it->second;
        }
        json resp = h(path, body);
        {
            std::lock_guard<std::recursive_mutex> lk(mu_);
            record(to, from, path, "response", resp);
        }
        return resp;
    }

    const Transcript& transcript() const { return transcript_; }
    void clear_transcript() {
        std::lock_guard<std::recursive_mutex> lk(mu_);
        transcript_.clear();
    }

  private:
    void record(const std::string& from, const std::string& to,
                const std::string& path, const std::string& dir,
                const json& body) {
        TranscriptEntry e;
        e.time = clock_ ? clock_() : 0;
        e.from = from;
        e.to = to;
        e.path = path;
        e.direction = dir;
        e.body = body;
        transcript_.push_back(std::move(e));
    }

    mutable std::recursive_mutex mu_;
    std::map<std::string, Handler> services_;
    std::set<std::string> dead_;
    std::function<double()> clock_;
    Transcript transcript_;
};

// True if `needle` (e.g. a base64 hash or plaintext window) occurs anywhere
// in the serialized form of any recorded payload.
inline bool transcript_contains(const Transcript& t, const std::string& needle) {
    for (const auto& e : t)
        if (e.body.dump().find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace dnascreen

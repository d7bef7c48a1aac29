// HTTP bindings: exposes a service Handler over real sockets and implements
// the Channel contract on top of HTTP, so the same server code runs behind
// the in-memory transport and the network.
#pragma once

#include <map>
#include <memory>
#include <string>

#include <httplib.h>

#include "dnascreen/errors.hpp"
#include "dnascreen/transport.hpp"

namespace dnascreen {

// Paths served as GET (no body); everything else is POST with a JSON body.
inline bool is_get_path(const std::string& path) {
    return path == "/status" || path == "/version";
}

// Wires a Handler into an HTTP server. Errors map to status 400 with a JSON
// body naming the error code, which the client side converts back.
inline void bind_handler(httplib::Server& srv, Handler handler) {
    auto respond = [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            json body = req.body.empty() ? json::object() : json::parse(req.body);
            json out = handler(req.path, body);
            res.set_content(out.dump(), "application/json");
        } catch (const Error& e) {
            res.status = 400;
            res.set_content(
                json{{"error", err_name(e.code())}, {"message", e.what()}}.dump(),
                "application/json");
        } catch (const std::exception& e) {
            res.status = 500;
            res.set_content(
                json{{"error", "Internal"}, {"message", e.what()}}.dump(),
                "application/json");
        }
    };
    srv.Get(".*", respond);
    srv.Post(".*", respond);
}

// Channel over HTTP: maps service names ("ks1", "db") to host:port.
class HttpChannel : public Channel {
  public:
    explicit HttpChannel(std::map<std::string, std::string> addresses)
        : addresses_(std::move(addresses)) {}

    void set_address(const std::string& name, const std::string& addr) {
        addresses_[name] = addr;
    }

    json call(const std::string& /*from*/, const std::string& to,
              const std::string& path, const json& body) override {
        auto it = addresses_.find(to);
        if (it == addresses_.end())
            throw Error(Err::ServerUnreachable, "no address for " + to);
        httplib::Client cli(it->second);
        cli.set_connection_timeout(5);
        cli.set_read_timeout(60);
        httplib::Result res =
            is_get_path(path) ? cli.Get(path)
                              : cli.Post(path, body.dump(), "application/json");
        if (!res)
            throw Error(Err::ServerUnreachable, to + " unreachable");
        json out = json::parse(res->body);
        if (res->status != 200) {
            Err code = Err::ServerUnreachable;
            if (out.contains("error")) {
                try {
                    code = err_from_name(out.at("error").get<std::string>());
                } catch (const Error&) {
                }
            }
            throw Error(code, out.value("message", std::string("remote error")));
        }
        return out;
    }

  private:
    std::map<std::string, std::string> addresses_;
};

}  // namespace dnascreen

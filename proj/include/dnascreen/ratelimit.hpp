// Per-client token-bucket rate limiting keyed by certificate fingerprint.
#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace dnascreen {

// One bucket: `capacity` tokens maximum, refilled continuously at
// `refill_per_sec`. Time is supplied by the caller in seconds so the same
// limiter works against a wall clock or a simulated scenario clock.
struct TokenBucket {
    double capacity = 0;
    double refill_per_sec = 0;
    double tokens = 0;
    double last = 0;

    TokenBucket() = default;
    TokenBucket(double cap, double refill, double now)
        : capacity(cap), refill_per_sec(refill), tokens(cap), last(now) {}

    void advance(double now) {
        if (now > last) {
            tokens = std::min(capacity, tokens + (now - last) * refill_per_sec);
            last = now;
        }
    }

    // Consumes `n` tokens if available. On refusal returns the number of
    // seconds after which the request would fit (retry-after hint); requests
    // larger than the bucket capacity can never fit and report that via a
    // nullopt-wrapped -1 sentinel handled by the caller.
    std::optional<double> try_consume(double n, double now) {
        advance(now);
        if (n <= tokens) {
            tokens -= n;
            return std::nullopt;
        }
        if (refill_per_sec <= 0 || n > capacity) return -1.0;
        return (n - tokens) / refill_per_sec;
    }
};

// Default budget: 50,000 windows per second per client certificate.
inline constexpr double kDefaultRateCapacity = 50000.0;
inline constexpr double kDefaultRateRefill = 50000.0;

class RateLimiter {
  public:
    RateLimiter(double capacity = kDefaultRateCapacity,
                double refill = kDefaultRateRefill)
        : capacity_(capacity), refill_(refill) {}

    // nullopt = allowed; otherwise the retry-after hint in seconds
    // (negative when the request exceeds bucket capacity outright).
    std::optional<double> check(const std::string& client, double n, double now) {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = buckets_.find(client);
        if (it == buckets_.end())
            it = buckets_.emplace(client, TokenBucket(capacity_, refill_, now)).first;
        return it->second.try_consume(n, now);
    }

    double capacity() const { return capacity_; }
    double refill_per_sec() const { return refill_; }

  private:
    double capacity_;
    double refill_;
    std::mutex mu_;
    std::map<std::string, TokenBucket> buckets_;
};

}  // namespace dnascreen

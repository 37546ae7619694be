#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace v2xsec::keychain {

using KeyMaterial = std::array<std::uint8_t, 32>;

/// Nodes of the sub-divided key hierarchy:
///
///   K_AMF -> K_OTK -> K_TM  -> K_SRPK
///                  -> K_Hub -> K_LRPK
///
/// K_OTK is the one-time key (also called K_OTP).
enum class KeyLabel : std::uint8_t { amf, otk, tm, hub, lrpk, srpk };

inline constexpr std::array<KeyLabel, 6> kAllLabels = {KeyLabel::amf, KeyLabel::otk, KeyLabel::tm,
                                                       KeyLabel::hub, KeyLabel::lrpk, KeyLabel::srpk};

std::string_view to_string(KeyLabel label);
std::optional<KeyLabel> parse_label(std::string_view text);
std::optional<KeyLabel> parent_of(KeyLabel label);
/// True when `node` is `ancestor` or lies below it.
bool is_descendant(KeyLabel node, KeyLabel ancestor);

struct KeyNode {
    KeyLabel label;
    KeyMaterial material;
    std::uint64_t epoch = 0;
    std::optional<KeyLabel> parent;
};

struct DerivationRecord {
    double timestamp;
    KeyLabel label;
    std::uint64_t epoch;
};

/// The six-node hierarchy plus its derivation log.
///
/// Each child is HMAC-SHA256(parent material, context(label, epoch)); K_AMF
/// is keyed by the root material. Refreshes must be serialised by the
/// caller; const member functions are safe to call concurrently between
/// refreshes.
class KeyHierarchy {
public:
    const KeyNode& node(KeyLabel label) const { return nodes_[index(label)]; }
    std::span<const DerivationRecord> derivation_log() const { return log_; }

    /// Re-derives `label` and everything below it at the next epoch.
    /// Throws OrderingError when `timestamp` precedes the last log entry.
    void refresh(KeyLabel label, double timestamp);

    void write_log_csv(std::ostream& out) const;

    bool operator==(const KeyHierarchy& other) const;

private:
    friend KeyHierarchy build_hierarchy(const KeyMaterial& root, double timestamp);

    static std::size_t index(KeyLabel label) { return static_cast<std::size_t>(label); }
    void derive(KeyLabel label, std::uint64_t epoch, double timestamp);

    KeyMaterial root_{};
    std::array<KeyNode, 6> nodes_{};
    std::vector<DerivationRecord> log_;
};

/// Derives the full tree from a nonzero 256-bit root.
KeyHierarchy build_hierarchy(const KeyMaterial& root, double timestamp = 0.0);

/// Value-returning refresh.
KeyHierarchy refresh_subtree(const KeyHierarchy& hierarchy, KeyLabel label, double timestamp);

/// Same, by label name ("K_OTP" is accepted for K_OTK). Unknown names are a DomainError.
KeyHierarchy refresh_subtree(const KeyHierarchy& hierarchy, std::string_view label, double timestamp);

enum class SessionMode { long_range, short_range };

/// K_LRPK for long range, K_SRPK for short range.
KeyLabel passkey_for(SessionMode mode);

/// What a peer holds after provisioning: a copy of one passkey at one epoch.
struct PeerCredential {
    std::string peer;
    KeyLabel label;
    std::uint64_t epoch;
    KeyMaterial material;
};

PeerCredential issue_credential(const KeyHierarchy& hierarchy, SessionMode mode, std::string peer);

struct Pass {
    KeyMaterial challenge;
    KeyMaterial response;
};

struct Session {
    SessionMode mode;
    KeyLabel passkey_label;
    int passes_used;
    double established_at;
    std::string peer;
    std::uint64_t epoch;
    std::vector<Pass> transcript;
};

/// Runs a Q-pass keyed-hash challenge/response between the network (holding
/// `hierarchy`) and `peer`. Throws AuthenticationError when the peer's
/// credential is stale or otherwise does not match the current passkey.
///
/// This is a simulation for pass accounting and invalidation tests, not a
/// vetted authentication protocol.
Session establish_session(const KeyHierarchy& hierarchy, SessionMode mode, const PeerCredential& peer,
                          int passes, double at);

/// Re-checks every pass of a transcript against the hierarchy's current passkey.
bool verify_session(const KeyHierarchy& hierarchy, const Session& session);

}  // namespace v2xsec::keychain

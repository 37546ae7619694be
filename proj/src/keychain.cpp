#include "v2xsec/keychain.hpp"

#include <sodium.h>

#include <algorithm>
#include <iomanip>
#include <mutex>
#include <sstream>

#include "v2xsec/error.hpp"

namespace v2xsec::keychain {

namespace {

void ensure_sodium() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (sodium_init() < 0) {
            throw Error("libsodium initialisation failed");
        }
    });
}

void append_u64(std::vector<std::uint8_t>& out, std::uint64_t value) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        out.push_back(static_cast<std::uint8_t>(value >> shift));
    }
}

void append_text(std::vector<std::uint8_t>& out, std::string_view text) {
    append_u64(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
}

KeyMaterial hmac(const KeyMaterial& key, std::span<const std::uint8_t> message) {
    ensure_sodium();
    KeyMaterial out{};
    crypto_auth_hmacsha256(out.data(), message.data(), message.size(), key.data());
    return out;
}

// Per-label context string; the label keeps derivations of different nodes apart.
std::vector<std::uint8_t> derivation_context(KeyLabel label, std::uint64_t epoch) {
    std::vector<std::uint8_t> context;
    append_text(context, "v2xsec-kdf-v1");
    append_text(context, to_string(label));
    append_u64(context, epoch);
    return context;
}

KeyMaterial challenge_for(const Session& session, int pass_index) {
    // Public session fields only.
    std::vector<std::uint8_t> message;
    append_text(message, "v2xsec-challenge-v1");
    append_text(message, session.peer);
    append_u64(message, static_cast<std::uint64_t>(session.mode));
    append_u64(message, static_cast<std::uint64_t>(pass_index));
    std::ostringstream at;
    at << std::setprecision(17) << session.established_at;
    append_text(message, at.str());
    KeyMaterial zero{};
    return hmac(zero, message);
}

KeyMaterial response_for(const KeyMaterial& passkey, const KeyMaterial& challenge, int pass_index) {
    std::vector<std::uint8_t> message;
    append_text(message, "v2xsec-response-v1");
    message.insert(message.end(), challenge.begin(), challenge.end());
    append_u64(message, static_cast<std::uint64_t>(pass_index));
    return hmac(passkey, message);
}

bool constant_time_equal(const KeyMaterial& a, const KeyMaterial& b) {
    return sodium_memcmp(a.data(), b.data(), a.size()) == 0;
}

}  // namespace

std::string_view to_string(KeyLabel label) {
    switch (label) {
        case KeyLabel::amf: return "K_AMF";
        case KeyLabel::otk: return "K_OTK";
        case KeyLabel::tm: return "K_TM";
        case KeyLabel::hub: return "K_Hub";
        case KeyLabel::lrpk: return "K_LRPK";
        case KeyLabel::srpk: return "K_SRPK";
    }
    return "?";
}

std::optional<KeyLabel> parse_label(std::string_view text) {
    if (text == "K_OTP") {
        return KeyLabel::otk;
    }
    for (KeyLabel label : kAllLabels) {
        if (to_string(label) == text) {
            return label;
        }
    }
    return std::nullopt;
}

std::optional<KeyLabel> parent_of(KeyLabel label) {
    switch (label) {
        case KeyLabel::amf: return std::nullopt;
        case KeyLabel::otk: return KeyLabel::amf;
        case KeyLabel::tm:
        case KeyLabel::hub: return KeyLabel::otk;
        case KeyLabel::srpk: return KeyLabel::tm;
        case KeyLabel::lrpk: return KeyLabel::hub;
    }
    return std::nullopt;
}

bool is_descendant(KeyLabel node, KeyLabel ancestor) {
    for (std::optional<KeyLabel> cur = node; cur; cur = parent_of(*cur)) {
        if (*cur == ancestor) {
            return true;
        }
    }
    return false;
}

void KeyHierarchy::derive(KeyLabel label, std::uint64_t epoch, double timestamp) {
    const auto parent = parent_of(label);
    const KeyMaterial& key = parent ? nodes_[index(*parent)].material : root_;
    nodes_[index(label)] = KeyNode{label, hmac(key, derivation_context(label, epoch)), epoch, parent};
    log_.push_back({timestamp, label, epoch});
}

void KeyHierarchy::refresh(KeyLabel label, double timestamp) {
    if (!log_.empty() && timestamp < log_.back().timestamp) {
        throw OrderingError("key refresh timestamp precedes the derivation log");
    }
    // kAllLabels lists parents before children.
    for (KeyLabel node : kAllLabels) {
        if (!is_descendant(node, label)) {
            continue;
        }
        std::uint64_t epoch = nodes_[index(node)].epoch + 1;
        if (const auto parent = parent_of(node)) {
            epoch = std::max(epoch, nodes_[index(*parent)].epoch);
        }
        derive(node, epoch, timestamp);
    }
}

void KeyHierarchy::write_log_csv(std::ostream& out) const {
    out << "timestamp_s,label,epoch\n";
    for (const auto& record : log_) {
        out << std::setprecision(9) << record.timestamp << ',' << to_string(record.label) << ','
            << record.epoch << '\n';
    }
}

bool KeyHierarchy::operator==(const KeyHierarchy& other) const {
    for (KeyLabel label : kAllLabels) {
        const KeyNode& a = node(label);
        const KeyNode& b = other.node(label);
        if (a.material != b.material || a.epoch != b.epoch || a.parent != b.parent) {
            return false;
        }
    }
    return true;
}

KeyHierarchy build_hierarchy(const KeyMaterial& root, double timestamp) {
    if (std::all_of(root.begin(), root.end(), [](std::uint8_t b) { return b == 0; })) {
        throw DomainError("root key material must be nonzero");
    }
    KeyHierarchy h;
    h.root_ = root;
    for (KeyLabel label : kAllLabels) {
        h.derive(label, 0, timestamp);
    }
    return h;
}

KeyHierarchy refresh_subtree(const KeyHierarchy& hierarchy, KeyLabel label, double timestamp) {
    KeyHierarchy copy = hierarchy;
    copy.refresh(label, timestamp);
    return copy;
}

KeyHierarchy refresh_subtree(const KeyHierarchy& hierarchy, std::string_view label, double timestamp) {
    const auto parsed = parse_label(label);
    if (!parsed) {
        throw DomainError("unknown key label '" + std::string(label) + "'");
    }
    return refresh_subtree(hierarchy, *parsed, timestamp);
}

KeyLabel passkey_for(SessionMode mode) {
    return mode == SessionMode::long_range ? KeyLabel::lrpk : KeyLabel::srpk;
}

PeerCredential issue_credential(const KeyHierarchy& hierarchy, SessionMode mode, std::string peer) {
    const KeyNode& key = hierarchy.node(passkey_for(mode));
    return {std::move(peer), key.label, key.epoch, key.material};
}

Session establish_session(const KeyHierarchy& hierarchy, SessionMode mode, const PeerCredential& peer,
                          int passes, double at) {
    if (passes < 1) {
        throw DomainError("a session needs at least one pass");
    }
    const KeyLabel label = passkey_for(mode);
    if (peer.label != label) {
        throw AuthenticationError("peer credential is for " + std::string(to_string(peer.label)) +
                                  ", session needs " + std::string(to_string(label)));
    }
    const KeyNode& current = hierarchy.node(label);

    Session session{mode, label, 0, at, peer.peer, current.epoch, {}};
    session.transcript.reserve(static_cast<std::size_t>(passes));
    for (int i = 0; i < passes; ++i) {
        const KeyMaterial challenge = challenge_for(session, i);
        const KeyMaterial response = response_for(peer.material, challenge, i);
        if (!constant_time_equal(response, response_for(current.material, challenge, i))) {
            std::ostringstream msg;
            msg << "authentication failed for peer '" << peer.peer << "' at pass " << i + 1
                << " (peer epoch " << peer.epoch << ", current epoch " << current.epoch << ")";
            throw AuthenticationError(msg.str());
        }
        session.transcript.push_back({challenge, response});
        ++session.passes_used;
    }
    return session;
}

bool verify_session(const KeyHierarchy& hierarchy, const Session& session) {
    const KeyNode& current = hierarchy.node(session.passkey_label);
    if (session.transcript.size() != static_cast<std::size_t>(session.passes_used)) {
        return false;
    }
    for (int i = 0; i < session.passes_used; ++i) {
        const Pass& pass = session.transcript[static_cast<std::size_t>(i)];
        if (!constant_time_equal(pass.challenge, challenge_for(session, i)) ||
            !constant_time_equal(pass.response, response_for(current.material, pass.challenge, i))) {
            return false;
        }
    }
    return true;
}

}  // namespace v2xsec::keychain

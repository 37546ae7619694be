#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "v2xsec/error.hpp"
#include "v2xsec/keychain.hpp"

using namespace v2xsec;
using namespace v2xsec::keychain;

namespace {

KeyMaterial random_root(std::mt19937_64& rng) {
    KeyMaterial root{};
    for (auto& b : root) {
        b = static_cast<std::uint8_t>(rng());
    }
    root[0] |= 1;  // never all-zero
    return root;
}

KeyMaterial fixed_root() {
    KeyMaterial root{};
    for (std::size_t i = 0; i < root.size(); ++i) {
        root[i] = static_cast<std::uint8_t>(i * 7 + 3);
    }
    return root;
}

}  // namespace

TEST_CASE("labels and tree shape") {
    CHECK(to_string(KeyLabel::otk) == "K_OTK");
    CHECK(parse_label("K_OTP") == KeyLabel::otk);
    CHECK(parse_label("K_SRPK") == KeyLabel::srpk);
    CHECK_FALSE(parse_label("K_NOPE").has_value());
    for (KeyLabel l : kAllLabels) {
        CHECK(parse_label(to_string(l)) == l);
    }
    CHECK_FALSE(parent_of(KeyLabel::amf).has_value());
    CHECK(parent_of(KeyLabel::otk) == KeyLabel::amf);
    CHECK(parent_of(KeyLabel::tm) == KeyLabel::otk);
    CHECK(parent_of(KeyLabel::hub) == KeyLabel::otk);
    CHECK(parent_of(KeyLabel::srpk) == KeyLabel::tm);
    CHECK(parent_of(KeyLabel::lrpk) == KeyLabel::hub);
    CHECK(is_descendant(KeyLabel::srpk, KeyLabel::amf));
    CHECK(is_descendant(KeyLabel::tm, KeyLabel::tm));
    CHECK_FALSE(is_descendant(KeyLabel::lrpk, KeyLabel::tm));
    CHECK_FALSE(is_descendant(KeyLabel::otk, KeyLabel::hub));
}

TEST_CASE("derivation is deterministic") {
    const auto a = build_hierarchy(fixed_root());
    const auto b = build_hierarchy(fixed_root());
    CHECK(a == b);
    for (KeyLabel l : kAllLabels) {
        CHECK(a.node(l).material == b.node(l).material);
        CHECK(a.node(l).epoch == 0);
        CHECK(a.node(l).parent == parent_of(l));
    }
    std::ostringstream la, lb;
    a.write_log_csv(la);
    b.write_log_csv(lb);
    CHECK(la.str() == lb.str());
    CHECK(la.str().rfind("timestamp_s,label,epoch\n", 0) == 0);

    auto other = fixed_root();
    other[31] ^= 1;
    CHECK_FALSE(build_hierarchy(other) == a);
    CHECK_THROWS_AS(build_hierarchy(KeyMaterial{}), DomainError);
}

TEST_CASE("no collisions across 10^4 random roots") {
    std::mt19937_64 rng(2024);
    std::set<KeyMaterial> seen;
    std::size_t total = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto h = build_hierarchy(random_root(rng));
        for (KeyLabel l : kAllLabels) {
            seen.insert(h.node(l).material);
            ++total;
        }
    }
    CHECK(seen.size() == total);
}

TEST_CASE("refresh re-derives exactly the subtree") {
    for (KeyLabel target : kAllLabels) {
        const auto before = build_hierarchy(fixed_root());
        const auto after = refresh_subtree(before, target, 10.0);
        for (KeyLabel l : kAllLabels) {
            INFO(to_string(target) << " -> " << to_string(l));
            if (is_descendant(l, target)) {
                CHECK(after.node(l).material != before.node(l).material);
                CHECK(after.node(l).epoch > before.node(l).epoch);
            } else {
                CHECK(after.node(l).material == before.node(l).material);
                CHECK(after.node(l).epoch == before.node(l).epoch);
            }
        }
        CHECK(after.derivation_log().size() > before.derivation_log().size());
    }
}

TEST_CASE("epochs never regress and children follow parents") {
    auto h = build_hierarchy(fixed_root());
    h.refresh(KeyLabel::srpk, 1.0);
    h.refresh(KeyLabel::srpk, 2.0);
    CHECK(h.node(KeyLabel::srpk).epoch == 2);
    h.refresh(KeyLabel::tm, 3.0);
    CHECK(h.node(KeyLabel::tm).epoch == 1);
    CHECK(h.node(KeyLabel::srpk).epoch == 3);
    h.refresh(KeyLabel::amf, 4.0);
    for (KeyLabel l : kAllLabels) {
        if (auto p = parent_of(l)) {
            CHECK(h.node(l).epoch >= h.node(*p).epoch);
        }
    }
    CHECK_THROWS_AS(h.refresh(KeyLabel::hub, 3.5), OrderingError);
    CHECK_THROWS_AS(refresh_subtree(h, "K_BOGUS", 5.0), DomainError);
    CHECK_NOTHROW(refresh_subtree(h, "K_OTP", 5.0));
}

TEST_CASE("sessions") {
    const auto h = build_hierarchy(fixed_root());
    for (auto mode : {SessionMode::long_range, SessionMode::short_range}) {
        const auto cred = issue_credential(h, mode, "peer-1");
        CHECK(cred.label == passkey_for(mode));
        for (int q = 1; q <= 5; ++q) {
            const auto s = establish_session(h, mode, cred, q, 1.0);
            CHECK(s.passes_used == q);
            CHECK(s.transcript.size() == static_cast<std::size_t>(q));
            CHECK(verify_session(h, s));
        }
        CHECK_THROWS_AS(establish_session(h, mode, cred, 0, 1.0), DomainError);
    }
    const auto wrong = issue_credential(h, SessionMode::long_range, "peer-2");
    CHECK_THROWS_AS(establish_session(h, SessionMode::short_range, wrong, 1, 1.0), AuthenticationError);

    auto forged = issue_credential(h, SessionMode::short_range, "peer-3");
    forged.material[0] ^= 0x80;
    CHECK_THROWS_AS(establish_session(h, SessionMode::short_range, forged, 2, 1.0), AuthenticationError);

    auto s = establish_session(h, SessionMode::short_range, issue_credential(h, SessionMode::short_range, "p"), 3, 1.0);
    s.transcript[1].response[5] ^= 1;
    CHECK_FALSE(verify_session(h, s));
}

TEST_CASE("refresh invalidates descendant-keyed sessions only") {
    for (KeyLabel target : kAllLabels) {
        const auto h = build_hierarchy(fixed_root());
        std::vector<Session> sessions;
        for (auto mode : {SessionMode::long_range, SessionMode::short_range}) {
            sessions.push_back(establish_session(h, mode, issue_credential(h, mode, "v"), 2, 1.0));
        }
        const auto refreshed = refresh_subtree(h, target, 2.0);
        for (const auto& s : sessions) {
            INFO("refresh " << to_string(target) << ", session on " << to_string(s.passkey_label));
            CHECK(verify_session(refreshed, s) == !is_descendant(s.passkey_label, target));
        }
    }
}

TEST_CASE("replays and stale credentials fail after refresh") {
    const auto h = build_hierarchy(fixed_root());
    const auto cred = issue_credential(h, SessionMode::long_range, "v7");
    const auto old_session = establish_session(h, SessionMode::long_range, cred, 4, 1.0);
    const auto refreshed = refresh_subtree(h, KeyLabel::hub, 2.0);

    CHECK_FALSE(verify_session(refreshed, old_session));
    auto replay = old_session;
    replay.established_at = 3.0;
    replay.epoch = refreshed.node(KeyLabel::lrpk).epoch;
    CHECK_FALSE(verify_session(refreshed, replay));
    CHECK_THROWS_AS(establish_session(refreshed, SessionMode::long_range, cred, 1, 3.0), AuthenticationError);

    const auto fresh = issue_credential(refreshed, SessionMode::long_range, "v7");
    CHECK(verify_session(refreshed, establish_session(refreshed, SessionMode::long_range, fresh, 4, 3.0)));
}

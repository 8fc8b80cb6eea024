#include "doctest.h"

#include "qadv/errors.hpp"
#include "qadv/provers/provers.hpp"
#include "qadv/tcf/rabin.hpp"
#include "qadv/wire/frame.hpp"
#include "qadv/wire/keyfile.hpp"
#include "qadv/wire/session.hpp"

#include <unistd.h>

#include <future>
#include <thread>

using namespace qadv;
using namespace qadv::wire;
using nlohmann::json;

namespace {

json random_payload(Rng& rng, int depth = 0) {
    switch (rng.below(depth > 2 ? 4 : 6)) {
        case 0: return json(rng.next_u64());
        case 1: return json(rng.coin());
        case 2: return json(to_decimal(rng.random_bits(1 + unsigned(rng.below(300)))));
        case 3: return json(nullptr);
        case 4: {
            json a = json::array();
            for (auto i = rng.below(4); i > 0; --i) a.push_back(random_payload(rng, depth + 1));
            return a;
        }
        default: {
            json o = json::object();
            for (auto i = rng.below(4); i > 0; --i) o["k" + std::to_string(rng.below(100))] = random_payload(rng, depth + 1);
            return o;
        }
    }
}

struct Pipes {
    int a2b[2], b2a[2];
    Pipes() {
        REQUIRE(::pipe(a2b) == 0);
        REQUIRE(::pipe(b2a) == 0);
    }
};

}  // namespace

TEST_CASE("frames round trip") {
    Rng rng(1);
    const char* tags[] = {"key", "image", "challenge", "preimage", "vector", "start", "end", "anything"};
    for (int i = 0; i < 1000; ++i) {
        WireFrame f;
        f.session = std::to_string(rng.next_u64());
        f.seq = rng.next_u64() >> rng.below(64);
        f.tag = tags[rng.below(8)];
        f.payload = random_payload(rng);
        const std::string line = encode_frame(f);
        CHECK(line.back() == '\n');
        CHECK(std::count(line.begin(), line.end(), '\n') == 1);
        CHECK(decode_frame(line) == f);
    }
}

TEST_CASE("round messages ride in frames") {
    const BitString r(BigNat(12345), 40);
    const auto f = WireFrame::of("s", 3, protocol::VectorMsg{r});
    CHECK(f.is_round_message());
    const auto back = decode_frame(encode_frame(f)).message();
    CHECK(protocol::same_message(back, protocol::RoundMessage{protocol::VectorMsg{r}}));
    WireFrame ctl;
    ctl.tag = "ready";
    CHECK_FALSE(ctl.is_round_message());
    CHECK_THROWS_AS(ctl.message(), ProtocolViolation);
}

TEST_CASE("malformed frames") {
    WireFrame f;
    f.session = "abc";
    f.seq = 7;
    f.tag = "ready";
    f.payload = json::object();
    const std::string line = encode_frame(f);
    CHECK_THROWS_AS(decode_frame(line.substr(0, line.size() / 2)), ParseError);
    try {
        decode_frame(line.substr(0, 10));
        FAIL("no throw");
    } catch (const ParseError& e) {
        CHECK(e.byte_offset <= 11);
    }
    std::string v2 = line;
    v2.replace(v2.find("\"v\":1"), 5, "\"v\":2");
    try {
        decode_frame(v2);
        FAIL("no throw");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("version") != std::string::npos);
    }
    CHECK_THROWS_AS(decode_frame("[1,2]\n"), ParseError);
    CHECK_THROWS_AS(decode_frame("{\"v\":1,\"session\":3,\"seq\":0,\"msg\":{\"tag\":\"x\",\"payload\":{}}}"), ParseError);
}

TEST_CASE("framed peers enforce session and sequence") {
    Pipes p;
    FdChannel a(p.b2a[0], p.a2b[1], 2000, true), b(p.a2b[0], p.b2a[1], 2000, true);
    FramedPeer pa(a, "one");
    pa.send("ready", json::object());
    pa.send("ready", json::object());
    FramedPeer pb(b, "one");
    CHECK(pb.receive().seq == 0);
    CHECK(pb.receive().seq == 1);

    // replayed sequence number
    WireFrame f;
    f.session = "one";
    f.seq = 1;
    f.tag = "ready";
    f.payload = json::object();
    a.send(encode_frame(f));
    CHECK_THROWS_AS(pb.receive(), ProtocolViolation);

    FramedPeer pc(b, "one");
    f.session = "two";
    a.send(encode_frame(f));
    CHECK_THROWS_AS(pc.receive(), ProtocolViolation);

    FramedPeer pd(b, "one");
    f.session = "one";
    f.tag = "error";
    f.payload = {{"message", "boom"}};
    a.send(encode_frame(f));
    CHECK_THROWS_AS(pd.receive(), ProtocolViolation);
}

TEST_CASE("channel timeouts and EOF are transport errors") {
    Pipes p;
    FdChannel a(p.b2a[0], p.a2b[1], 100, true);
    CHECK_THROWS_AS(a.receive(), TransportError);
    ::close(p.b2a[1]);
    ::close(p.a2b[0]);
    CHECK_THROWS_AS(a.receive(), TransportError);
}

TEST_CASE("a session over pipes matches the in-process run") {
    const auto key = tcf::TcfKey::rabin(tcf::rabin_gen({32, 3}));
    VerifyOptions o;
    o.trials = 3000;
    o.seed = 11;
    Pipes p;
    FdChannel v(p.b2a[0], p.a2b[1], 5000, true), pr(p.a2b[0], p.b2a[1], 5000, true);
    std::thread prover_thread([&] {
        provers::IdealProver ideal(42);
        run_prover(pr, ideal);
    });
    const auto remote = serve_verifier(v, key, o);
    prover_thread.join();

    provers::IdealProver local_prover(42);
    const auto local = run_local(local_prover, key, o);
    CHECK(remote.report.to_json() == local.report.to_json());
    CHECK(std::abs(remote.report.score_value() - 0.414) < 0.1);
}

TEST_CASE("a session over tcp") {
    const auto key = tcf::TcfKey::rabin(tcf::rabin_gen({32, 4}));
    VerifyOptions o;
    o.trials = 1000;
    o.seed = 12;
    std::promise<std::uint16_t> port;
    auto fut = port.get_future();
    std::thread prover_thread([&] {
        const auto ch = tcp_connect("127.0.0.1", fut.get(), 5000);
        auto cheat = provers::make_prover("cheater", 5);
        run_prover(*ch, *cheat);
    });
    const auto ch = tcp_accept(0, 5000, [&](std::uint16_t p) { port.set_value(p); });
    const auto res = serve_verifier(*ch, key, o);
    prover_thread.join();
    CHECK(res.report.p_x == 1);
    CHECK(res.report.score_value() < 0.1);
}

TEST_CASE("a prover that dies mid-session is a transport error") {
    const auto key = tcf::TcfKey::rabin(tcf::rabin_gen({32, 5}));
    SpawnedChannel ch("head -n 1 > /dev/null", 2000);
    VerifyOptions o;
    o.trials = 10;
    CHECK_THROWS_AS(serve_verifier(ch, key, o), TransportError);
}

TEST_CASE("key files") {
    const auto key = tcf::TcfKey::rabin(tcf::rabin_gen({32, 6}));
    const json full = key_file_json(key);
    CHECK(full.contains("public"));
    CHECK(full.contains("secret"));
    CHECK(key_from_file_json(full, true).rabin_keys().p == key.rabin_keys().p);

    const json pub = key_file_json(key.public_part());
    CHECK_FALSE(pub.contains("secret"));
    CHECK(pub.dump().find(to_decimal(key.rabin_keys().p)) == std::string::npos);
    CHECK_THROWS_AS(key_from_file_json(pub, true), PreconditionError);
    CHECK_FALSE(key_from_file_json(pub, false).has_trapdoor());

    json bad = full;
    bad["secret"]["p"] = "7";
    CHECK_THROWS_AS(key_from_file_json(bad, true), PreconditionError);
    CHECK_THROWS_AS(key_from_file_json(json::array(), false), PreconditionError);
    CHECK_THROWS(read_key_file("/nonexistent/key.json", false));
}

TEST_CASE("the prover never sees secret fields") {
    const auto key = tcf::TcfKey::rabin(tcf::rabin_gen({32, 7}));
    Pipes p;
    FdChannel v(p.b2a[0], p.a2b[1], 5000, true), pr(p.a2b[0], p.b2a[1], 5000, true);
    std::vector<std::string> lines;
    struct Tap : LineChannel {
        LineChannel& inner;
        std::vector<std::string>& log;
        Tap(LineChannel& i, std::vector<std::string>& l) : inner(i), log(l) {}
        void send(const std::string& s) override { inner.send(s); }
        std::string receive() override {
            log.push_back(inner.receive());
            return log.back();
        }
    } tap(pr, lines);
    std::thread t([&] {
        provers::IdealProver ideal(1);
        run_prover(tap, ideal);
    });
    VerifyOptions o;
    o.trials = 20;
    serve_verifier(v, key, o);
    t.join();
    REQUIRE_FALSE(lines.empty());
    const std::string p_text = "\"" + to_decimal(key.rabin_keys().p) + "\"";
    for (const auto& l : lines) CHECK(l.find(p_text) == std::string::npos);
}

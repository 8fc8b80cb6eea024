#include "qadv/tcf/key.hpp"

#include "qadv/errors.hpp"
#include "qadv/rng.hpp"

#include <algorithm>
#include <bit>

namespace qadv::tcf {

using nlohmann::json;

namespace {

BigNat pow3(unsigned e) {
    BigNat k = 1;
    for (unsigned i = 0; i < e; ++i) k *= 3;
    return k;
}

std::string dec(const BigNat& v) { return to_decimal(v); }

BigNat big_field(const json& j, const char* name) {
    if (!j.contains(name) || !j[name].is_string())
        throw DomainError(std::string("key file: field '") + name + "' must be a decimal string");
    return from_decimal(j[name].get<std::string>());
}

}  // namespace

TcfKey TcfKey::rabin(RabinKeyPair keys, bool with_secret, unsigned lift) {
    TcfKey t;
    t.family_ = Family::Rabin;
    if (!with_secret) keys.p = keys.q = 0;
    t.secret_ = with_secret;
    t.bound_ = rabin_domain_bound(keys.N);
    t.keys_ = std::move(keys);
    t.lift_ = lift;
    t.k_ = pow3(lift);
    t.modulus_ = t.k_ * t.k_ * std::get<RabinKeyPair>(t.keys_).N;
    t.domain_bits_ = std::max(1u, bit_length(t.k_ * (t.bound_ - 1)));
    return t;
}

TcfKey TcfKey::rabin_public(const BigNat& N, unsigned lift) {
    return rabin(RabinKeyPair{N, 0, 0}, false, lift);
}

TcfKey TcfKey::ddh(DdhKeyPair keys) {
    TcfKey t;
    t.family_ = Family::Ddh;
    t.secret_ = keys.has_trapdoor();
    t.coord_bits_ = static_cast<unsigned>(std::countr_zero(keys.m));
    t.domain_bits_ = 1 + std::size_t{keys.k} * t.coord_bits_;
    t.keys_ = std::move(keys);
    return t;
}

bool TcfKey::has_trapdoor() const { return secret_; }

TcfKey TcfKey::public_part() const {
    if (family_ == Family::Rabin) return rabin_public(rabin_keys().N, lift_);
    DdhKeyPair pub = ddh_keys();
    pub.M.clear();
    pub.s.clear();
    return ddh(std::move(pub));
}

TcfKey TcfKey::with_lift(unsigned lift) const {
    if (family_ != Family::Rabin) throw PreconditionError("only Rabin keys can be lifted");
    return rabin(rabin_keys(), secret_, lift);
}

const RabinKeyPair& TcfKey::rabin_keys() const {
    if (family_ != Family::Rabin) throw PreconditionError("not a Rabin key");
    return std::get<RabinKeyPair>(keys_);
}

const DdhKeyPair& TcfKey::ddh_keys() const {
    if (family_ != Family::Ddh) throw PreconditionError("not a DDH key");
    return std::get<DdhKeyPair>(keys_);
}

BitString TcfKey::encode_ddh(const DdhInput& in) const {
    const auto& key = ddh_keys();
    BitString out(domain_bits_);
    out.set(0, in.b);
    for (unsigned i = 0; i < key.k; ++i)
        for (unsigned j = 0; j < coord_bits_; ++j) out.set(1 + i * coord_bits_ + j, (in.x[i] >> j) & 1u);
    return out;
}

DdhInput TcfKey::decode_ddh(const BitString& x) const {
    const auto& key = ddh_keys();
    if (x.size() != domain_bits_) throw DomainError("DDH input has wrong bit length");
    DdhInput in{x.get(0), std::vector<std::uint64_t>(key.k, 0)};
    for (unsigned i = 0; i < key.k; ++i)
        for (unsigned j = 0; j < coord_bits_; ++j)
            if (x.get(1 + i * coord_bits_ + j)) in.x[i] |= std::uint64_t{1} << j;
    return in;
}

bool TcfKey::in_domain(const BitString& x) const {
    if (x.size() != domain_bits_) return false;
    if (family_ == Family::Ddh) return true;  // every encoding is a valid (b, x)
    const BigNat X = x.to_bignat();
    return X % k_ == 0 && X / k_ < bound_;
}

Image TcfKey::eval(const BitString& x) const {
    if (!in_domain(x)) throw DomainError("input outside the function's domain");
    if (family_ == Family::Ddh) {
        const DdhInput in = decode_ddh(x);
        return ddh_eval(ddh_keys(), in.b, in.x);
    }
    const BigNat X = x.to_bignat();
    return {(X * X) % modulus_};
}

bool TcfKey::well_formed_image(const Image& y) const {
    if (family_ == Family::Rabin) return y.size() == 1 && y[0] >= 0 && y[0] < modulus_;
    const auto& key = ddh_keys();
    if (y.size() != key.k) return false;
    return std::all_of(y.begin(), y.end(), [&](const BigNat& v) { return v > 0 && v < key.P; });
}

std::vector<BitString> TcfKey::invert(const Image& y) const {
    if (!secret_) throw PreconditionError("inversion requires the trapdoor");
    if (!well_formed_image(y)) return {};
    std::vector<BitString> out;
    if (family_ == Family::Ddh) {
        try {
            for (const auto& in : ddh_invert(ddh_keys(), y)) out.push_back(encode_ddh(in));
        } catch (const NotInImage&) {
            return {};
        }
    } else {
        const BigNat k2 = k_ * k_;
        if (y[0] % k2 != 0) return {};
        for (const auto& r : rabin_invert(rabin_keys(), y[0] / k2)) out.push_back(encode_rabin(k_ * r));
    }
    std::sort(out.begin(), out.end(),
              [](const BitString& a, const BitString& b) { return a.to_bignat() < b.to_bignat(); });
    return out;
}

BitString TcfKey::sample_domain(Rng& rng) const {
    if (family_ == Family::Ddh) return BitString::random(domain_bits_, rng);
    return encode_rabin(k_ * rng.below(bound_));
}

json TcfKey::to_json(bool include_secret) const {
    include_secret = include_secret && secret_;
    json j;
    if (family_ == Family::Rabin) {
        const auto& r = rabin_keys();
        j["family"] = "rabin";
        j["N"] = dec(r.N);
        if (include_secret) {
            j["p"] = dec(r.p);
            j["q"] = dec(r.q);
        }
        return j;
    }
    const auto& d = ddh_keys();
    j["family"] = "ddh";
    j["P"] = dec(d.P);
    j["q"] = dec(d.q);
    j["g"] = dec(d.g);
    j["k"] = d.k;
    j["m"] = d.m;
    json gM = json::array();
    for (const auto& row : d.gM) {
        json r = json::array();
        for (const auto& v : row) r.push_back(dec(v));
        gM.push_back(r);
    }
    j["gM"] = gM;
    json gMs = json::array();
    for (const auto& v : d.gMs) gMs.push_back(dec(v));
    j["gMs"] = gMs;
    if (include_secret) {
        json M = json::array();
        for (const auto& row : d.M) {
            json r = json::array();
            for (const auto& v : row) r.push_back(dec(v));
            M.push_back(r);
        }
        j["M"] = M;
        json s = json::array();
        for (bool b : d.s) s.push_back(b ? 1 : 0);
        j["s"] = s;
    }
    return j;
}

TcfKey TcfKey::from_json(const json& j) {
    if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
        throw DomainError("key file: missing 'family'");
    const std::string family = j["family"].get<std::string>();
    if (family == "rabin") {
        for (const auto& [name, _] : j.items())
            if (name != "family" && name != "N" && name != "p" && name != "q")
                throw DomainError("key file: unexpected field '" + name + "'");
        const BigNat N = big_field(j, "N");
        if (N < 21) throw DomainError("key file: modulus too small");
        if (j.contains("p") != j.contains("q")) throw DomainError("key file: p and q must appear together");
        if (!j.contains("p")) return rabin_public(N);
        RabinKeyPair keys{N, big_field(j, "p"), big_field(j, "q")};
        if (!rabin_keys_valid(keys)) throw DomainError("key file: p, q do not form a Blum factorization of N");
        return rabin(keys, true);
    }
    if (family == "ddh") {
        DdhKeyPair d;
        d.P = big_field(j, "P");
        d.q = big_field(j, "q");
        d.g = big_field(j, "g");
        if (!j.contains("k") || !j["k"].is_number_unsigned()) throw DomainError("key file: bad 'k'");
        d.k = j["k"].get<unsigned>();
        if (d.k == 0) throw DomainError("key file: k must be positive");
        d.m = ddh_range_for(d.k);
        if (!j.contains("m") || j["m"] != d.m) throw DomainError("key file: 'm' must equal the power of two >= k^2");
        auto read_vec = [&](const json& arr, std::size_t len) {
            if (!arr.is_array() || arr.size() != len) throw DomainError("key file: array has wrong length");
            std::vector<BigNat> v;
            for (const auto& e : arr) {
                if (!e.is_string()) throw DomainError("key file: expected decimal string");
                v.push_back(from_decimal(e.get<std::string>()));
            }
            return v;
        };
        auto read_mat = [&](const char* name) {
            if (!j.contains(name) || !j[name].is_array() || j[name].size() != d.k)
                throw DomainError(std::string("key file: bad '") + name + "'");
            std::vector<std::vector<BigNat>> M;
            for (const auto& row : j[name]) M.push_back(read_vec(row, d.k));
            return M;
        };
        d.gM = read_mat("gM");
        if (!j.contains("gMs")) throw DomainError("key file: missing 'gMs'");
        d.gMs = read_vec(j["gMs"], d.k);
        if (j.contains("M") || j.contains("s")) {
            if (!j.contains("M") || !j.contains("s") || !j["s"].is_array() || j["s"].size() != d.k)
                throw DomainError("key file: secret fields incomplete");
            std::vector<bool> s;
            for (const auto& e : j["s"]) s.push_back(e.get<int>() != 0);
            DdhKeyPair full = ddh_from_secret(d.P, d.q, d.g, read_mat("M"), std::move(s));
            if (full.gM != d.gM || full.gMs != d.gMs) throw DomainError("key file: secret does not match public part");
            return ddh(std::move(full));
        }
        return ddh(std::move(d));
    }
    throw DomainError("key file: unknown family '" + family + "'");
}

}  // namespace qadv::tcf

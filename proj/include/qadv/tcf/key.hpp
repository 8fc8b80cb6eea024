#pragma once

#include "qadv/bitstring.hpp"
#include "qadv/tcf/ddh.hpp"
#include "qadv/tcf/rabin.hpp"

#include "json.hpp"

#include <string>
#include <variant>
#include <vector>

namespace qadv::tcf {

enum class Family { Rabin, Ddh };

/// An image under either family: one residue for Rabin, k group elements for DDH.
using Image = std::vector<BigNat>;

/// Uniform view of a TCF instance as the protocol sees it: domain elements are
/// fixed-length bit strings.
///
/// Rabin keys may carry a lift exponent: the function becomes
/// X -> X^2 mod k^2 N on X = k x with k = 3^lift. DDH inputs are encoded as
/// bit 0 = b followed by each x_i in log2(m) bits.
class TcfKey {
public:
    static TcfKey rabin(RabinKeyPair keys, bool with_secret = true, unsigned lift = 0);
    static TcfKey rabin_public(const BigNat& N, unsigned lift = 0);
    static TcfKey ddh(DdhKeyPair keys);

    Family family() const { return family_; }
    bool has_trapdoor() const;
    TcfKey public_part() const;
    TcfKey with_lift(unsigned lift) const;

    /// Bit length n of domain strings (the length of r and d).
    std::size_t domain_bits() const { return domain_bits_; }
    unsigned lift() const { return lift_; }
    /// 3^lift; 1 for DDH.
    const BigNat& k() const { return k_; }
    /// Modulus of the (possibly lifted) Rabin function.
    const BigNat& modulus() const { return modulus_; }

    const RabinKeyPair& rabin_keys() const;
    const DdhKeyPair& ddh_keys() const;

    bool in_domain(const BitString& x) const;
    /// Throws DomainError outside the domain.
    Image eval(const BitString& x) const;
    /// Every preimage of y, ascending by value. Empty when y is not an image.
    /// Requires the trapdoor.
    std::vector<BitString> invert(const Image& y) const;
    /// Uniform domain element.
    BitString sample_domain(Rng& rng) const;
    /// Structural range check on y (right arity, residues reduced).
    bool well_formed_image(const Image& y) const;

    BitString encode_rabin(const BigNat& X) const { return BitString(X, domain_bits_); }
    BitString encode_ddh(const DdhInput& in) const;
    DdhInput decode_ddh(const BitString& x) const;

    nlohmann::json to_json(bool include_secret) const;
    static TcfKey from_json(const nlohmann::json& j);

private:
    Family family_ = Family::Rabin;
    std::variant<RabinKeyPair, DdhKeyPair> keys_;
    bool secret_ = false;
    unsigned lift_ = 0;
    BigNat k_ = 1;
    BigNat modulus_ = 0;
    BigNat bound_ = 0;  // unlifted Rabin domain bound
    std::size_t domain_bits_ = 0;
    unsigned coord_bits_ = 0;
};

}  // namespace qadv::tcf

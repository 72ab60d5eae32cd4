//! The HQC public-key encryption scheme over the RM/RS concatenated code.
//!
//! ```text
//! KeyGen:  h <- R,  x, y of weight w,           pk = (h, s = x + h*y), sk = (x, y)
//! Encrypt: r1, r2 of weight w_r, e of weight w_e, u = r1 + h*r2, v = mG + s*r2 + e
//! Decrypt: decode(v + u*y) on the first N coordinates
//! ```
//!
//! The codeword `mG` occupies coordinates `0..N` of `v`; the trailing
//! `l = n - N` coordinates carry only noise and are dropped before decoding.

use rand_core::RngCore;

use crate::concat::{ConcatCode, Message};
use crate::error::{Error, Result};
use crate::params::{scheme_by_id, HqcParams};
use crate::ring::{FixedWeightSampler, RingElement, SparseSupport};
use crate::rng::{stream, Domain};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    pub h: RingElement,
    pub s: RingElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    pub x: SparseSupport,
    pub y: SparseSupport,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair {
    pub pk: PublicKey,
    pub sk: SecretKey,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    pub u: RingElement,
    pub v: RingElement,
}

/// Encryption randomness `(r1, r2, e)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptionNoise {
    pub r1: SparseSupport,
    pub r2: SparseSupport,
    pub e: SparseSupport,
}

/// A parameter set together with its public code.
#[derive(Clone, Debug)]
pub struct Hqc {
    params: HqcParams,
    code: ConcatCode,
}

impl Hqc {
    pub fn new(params: HqcParams) -> Self {
        let code = params.code();
        Self { params, code }
    }

    pub fn params(&self) -> &HqcParams {
        &self.params
    }

    pub fn code(&self) -> &ConcatCode {
        &self.code
    }

    /// Key generation; `h` is drawn from `public_rng`, `(x, y)` from `secret_rng`.
    pub fn keygen(&self, public_rng: &mut impl RngCore, secret_rng: &mut impl RngCore) -> KeyPair {
        let n = self.params.n;
        let h = RingElement::random(n, public_rng);
        let mut sampler = FixedWeightSampler::new(n);
        let x = sampler.sample(self.params.w, secret_rng).expect("w <= n");
        let y = sampler.sample(self.params.w, secret_rng).expect("w <= n");
        self.keypair_from_parts(h, x, y).expect("lengths match")
    }

    /// Key generation from the `PublicElement` and `SecretKey` streams of `seed`.
    pub fn keygen_seeded(&self, seed: u64) -> KeyPair {
        self.keygen(
            &mut stream(seed, Domain::PublicElement, 0),
            &mut stream(seed, Domain::SecretKey, 0),
        )
    }

    /// Deterministic key assembly, `s = x + h*y`.
    pub fn keypair_from_parts(
        &self,
        h: RingElement,
        x: SparseSupport,
        y: SparseSupport,
    ) -> Result<KeyPair> {
        let n = self.params.n;
        if h.len() != n || x.len() != n || y.len() != n {
            return Err(Error::invalid("key component length differs from n"));
        }
        let mut s = h.mul_sparse(&y)?;
        s.add_assign(&x.to_dense())?;
        Ok(KeyPair {
            pk: PublicKey { h, s },
            sk: SecretKey { x, y },
        })
    }

    pub fn sample_noise(&self, rng: &mut impl RngCore) -> EncryptionNoise {
        let mut sampler = FixedWeightSampler::new(self.params.n);
        let r1 = sampler.sample(self.params.w_r, rng).expect("w_r <= n");
        let r2 = sampler.sample(self.params.w_r, rng).expect("w_r <= n");
        let e = sampler.sample(self.params.w_e, rng).expect("w_e <= n");
        EncryptionNoise { r1, r2, e }
    }

    pub fn encrypt(
        &self,
        pk: &PublicKey,
        message: &Message,
        rng: &mut impl RngCore,
    ) -> Result<Ciphertext> {
        let noise = self.sample_noise(rng);
        self.encrypt_with(pk, message, &noise)
    }

    /// Encryption with caller-supplied randomness.
    pub fn encrypt_with(
        &self,
        pk: &PublicKey,
        message: &Message,
        noise: &EncryptionNoise,
    ) -> Result<Ciphertext> {
        let n = self.params.n;
        if pk.h.len() != n || pk.s.len() != n {
            return Err(Error::invalid("public key length differs from n"));
        }
        let mut u = pk.h.mul_sparse(&noise.r2)?;
        u.add_assign(&noise.r1.to_dense())?;

        let mut v = self.embed(message);
        v.add_assign(&pk.s.mul_sparse(&noise.r2)?)?;
        v.add_assign(&noise.e.to_dense())?;
        Ok(Ciphertext { u, v })
    }

    /// `mG` placed in coordinates `0..N` of a length-`n` vector.
    pub fn embed(&self, message: &Message) -> RingElement {
        self.code
            .encode(message)
            .extended(self.params.n)
            .expect("code length <= n")
    }

    /// `v + u*y`, the noisy codeword seen by the decoder (full length `n`).
    pub fn received_word(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<RingElement> {
        let n = self.params.n;
        if ct.u.len() != n || ct.v.len() != n {
            return Err(Error::invalid("ciphertext length differs from n"));
        }
        let mut r = ct.u.mul_sparse(&sk.y)?;
        r.add_assign(&ct.v)?;
        Ok(r)
    }

    /// Decryption; `rng` only breaks ties in the inner decoder.
    ///
    /// [`Error::DecodeFailure`] here is a decryption failure.
    pub fn decrypt(
        &self,
        sk: &SecretKey,
        ct: &Ciphertext,
        rng: &mut impl RngCore,
    ) -> Result<Message> {
        let received = self.received_word(sk, ct)?.truncated(self.code.length())?;
        self.code.decode(&received, rng)
    }

    /// The decryption error `e' = v + u*y + mG`, equal to `x*r2 + r1*y + e`.
    pub fn extract_error(
        &self,
        sk: &SecretKey,
        ct: &Ciphertext,
        message: &Message,
    ) -> Result<RingElement> {
        let mut e = self.received_word(sk, ct)?;
        e.add_assign(&self.embed(message))?;
        Ok(e)
    }
}

const PK_MAGIC: &[u8; 4] = b"HQPK";
const SK_MAGIC: &[u8; 4] = b"HQSK";
const CT_MAGIC: &[u8; 4] = b"HQCT";

fn header(magic: &[u8; 4], id: u8) -> Vec<u8> {
    let mut out = magic.to_vec();
    out.push(id);
    out
}

fn parse_header<'a>(bytes: &'a [u8], magic: &[u8; 4], what: &str) -> Result<(u8, &'a [u8])> {
    if bytes.len() < 5 || &bytes[..4] != magic {
        return Err(Error::Format(format!("not a {what} file")));
    }
    Ok((bytes[4], &bytes[5..]))
}

fn read_vector(bytes: &[u8], n: usize) -> Result<(RingElement, &[u8])> {
    let (v, used) = RingElement::from_bytes(bytes)?;
    if v.len() != n {
        return Err(Error::Format(format!(
            "vector length {} does not match n = {n}",
            v.len()
        )));
    }
    Ok((v, &bytes[used..]))
}

fn read_support(bytes: &[u8], n: usize, w: usize) -> Result<(SparseSupport, &[u8])> {
    let need = 4 * w;
    let body = bytes
        .get(..need)
        .ok_or_else(|| Error::Format("truncated secret key".into()))?;
    let indices: Vec<u32> = body
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("chunk of 4")))
        .collect();
    if indices.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Format(
            "secret support is not strictly increasing".into(),
        ));
    }
    let support = SparseSupport::new(n, indices).map_err(|e| Error::Format(e.to_string()))?;
    Ok((support, &bytes[need..]))
}

fn ensure_consumed(rest: &[u8]) -> Result<()> {
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes", rest.len())));
    }
    Ok(())
}

/// Parameter-set id stored in a key or ciphertext file.
pub fn file_param_id(bytes: &[u8]) -> Result<u8> {
    for magic in [PK_MAGIC, SK_MAGIC, CT_MAGIC] {
        if bytes.len() >= 5 && &bytes[..4] == magic {
            return Ok(bytes[4]);
        }
    }
    Err(Error::Format("unrecognized file magic".into()))
}

/// Parameters of a key or ciphertext file, from its stored id.
pub fn file_params(bytes: &[u8]) -> Result<HqcParams> {
    scheme_by_id(file_param_id(bytes)?)
}

impl PublicKey {
    /// `"HQPK" || id || h || s`, vectors in the ring serialization.
    pub fn to_bytes(&self, params: &HqcParams) -> Vec<u8> {
        let mut out = header(PK_MAGIC, params.id);
        out.extend(self.h.to_bytes());
        out.extend(self.s.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &HqcParams) -> Result<Self> {
        let (id, rest) = parse_header(bytes, PK_MAGIC, "public key")?;
        check_id(id, params)?;
        let (h, rest) = read_vector(rest, params.n)?;
        let (s, rest) = read_vector(rest, params.n)?;
        ensure_consumed(rest)?;
        Ok(Self { h, s })
    }
}

impl SecretKey {
    /// `"HQSK" || id || x || y`, each support as `w` sorted u32 LE indices.
    pub fn to_bytes(&self, params: &HqcParams) -> Vec<u8> {
        let mut out = header(SK_MAGIC, params.id);
        for support in [&self.x, &self.y] {
            for &i in support.indices() {
                out.extend_from_slice(&i.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &HqcParams) -> Result<Self> {
        let (id, rest) = parse_header(bytes, SK_MAGIC, "secret key")?;
        check_id(id, params)?;
        let (x, rest) = read_support(rest, params.n, params.w)?;
        let (y, rest) = read_support(rest, params.n, params.w)?;
        ensure_consumed(rest)?;
        Ok(Self { x, y })
    }
}

impl Ciphertext {
    /// `"HQCT" || id || u || v`.
    pub fn to_bytes(&self, params: &HqcParams) -> Vec<u8> {
        let mut out = header(CT_MAGIC, params.id);
        out.extend(self.u.to_bytes());
        out.extend(self.v.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &HqcParams) -> Result<Self> {
        let (id, rest) = parse_header(bytes, CT_MAGIC, "ciphertext")?;
        check_id(id, params)?;
        let (u, rest) = read_vector(rest, params.n)?;
        let (v, rest) = read_vector(rest, params.n)?;
        ensure_consumed(rest)?;
        Ok(Self { u, v })
    }
}

fn check_id(id: u8, params: &HqcParams) -> Result<()> {
    if id != params.id {
        return Err(Error::Format(format!(
            "file is for parameter set {id}, expected {} ({})",
            params.id, params.name
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{scheme, HQC_RMRS_128};

    fn hqc() -> Hqc {
        Hqc::new(scheme(HQC_RMRS_128).unwrap())
    }

    fn message(seed: u64) -> Message {
        let mut rng = stream(seed, Domain::Message, 0);
        let mut m = [0u8; 32];
        for b in m.iter_mut() {
            *b = rng.next_u64() as u8;
        }
        m
    }

    #[test]
    fn key_equation_and_weights() {
        let scheme = hqc();
        let kp = scheme.keygen_seeded(1);
        assert_eq!(kp.sk.x.weight(), 67);
        assert_eq!(kp.sk.y.weight(), 67);
        let mut lhs = kp.pk.h.mul_sparse(&kp.sk.y).unwrap();
        lhs.add_assign(&kp.pk.s).unwrap();
        assert_eq!(lhs, kp.sk.x.to_dense());
    }

    #[test]
    fn zero_secret_gives_zero_s() {
        let scheme = hqc();
        let n = scheme.params().n;
        let h = RingElement::random(n, &mut stream(2, Domain::PublicElement, 0));
        let kp = scheme
            .keypair_from_parts(h, SparseSupport::empty(n), SparseSupport::empty(n))
            .unwrap();
        assert!(kp.pk.s.is_zero());
    }

    #[test]
    fn keygen_is_deterministic() {
        let scheme = hqc();
        assert_eq!(scheme.keygen_seeded(3), scheme.keygen_seeded(3));
        assert_ne!(scheme.keygen_seeded(3), scheme.keygen_seeded(4));
    }

    #[test]
    fn noise_weights() {
        let scheme = hqc();
        let noise = scheme.sample_noise(&mut stream(5, Domain::Encryption, 0));
        assert_eq!(noise.r1.weight(), 77);
        assert_eq!(noise.r2.weight(), 77);
        assert_eq!(noise.e.weight(), 77);
    }

    #[test]
    fn round_trip_and_error_identity() {
        let scheme = hqc();
        let kp = scheme.keygen_seeded(6);
        let mut enc = stream(6, Domain::Encryption, 0);
        let mut dec = stream(6, Domain::Decoding, 0);
        for i in 0..5 {
            let m = message(i);
            let noise = scheme.sample_noise(&mut enc);
            let ct = scheme.encrypt_with(&kp.pk, &m, &noise).unwrap();
            assert_eq!(scheme.decrypt(&kp.sk, &ct, &mut dec).unwrap(), m);

            let e_prime = scheme.extract_error(&kp.sk, &ct, &m).unwrap();
            let mut expect = kp.sk.x.mul_sparse(&noise.r2).unwrap();
            expect
                .add_assign(&noise.r1.mul_sparse(&kp.sk.y).unwrap())
                .unwrap();
            expect.add_assign(&noise.e.to_dense()).unwrap();
            assert_eq!(e_prime, expect);
            assert!(e_prime.weight() <= 2 * 67 * 77 + 77);
        }
    }

    #[test]
    fn zero_noise_exposes_the_codeword() {
        let scheme = hqc();
        let kp = scheme.keygen_seeded(7);
        let n = scheme.params().n;
        let empty = EncryptionNoise {
            r1: SparseSupport::empty(n),
            r2: SparseSupport::empty(n),
            e: SparseSupport::empty(n),
        };
        let m = message(7);
        let ct = scheme.encrypt_with(&kp.pk, &m, &empty).unwrap();
        let received = scheme.received_word(&kp.sk, &ct).unwrap();
        let code_len = scheme.code().length();
        assert_eq!(
            received.truncated(code_len).unwrap(),
            scheme.code().encode(&m)
        );
        assert!(scheme.extract_error(&kp.sk, &ct, &m).unwrap().is_zero());
    }

    #[test]
    fn tampered_u_still_decrypts() {
        let scheme = hqc();
        let kp = scheme.keygen_seeded(8);
        let mut rng = stream(8, Domain::Encryption, 0);
        let mut dec = stream(8, Domain::Decoding, 0);
        let mut ok = 0;
        for i in 0..20 {
            let m = message(100 + i);
            let mut ct = scheme.encrypt(&kp.pk, &m, &mut rng).unwrap();
            let pos = crate::rng::bounded(&mut rng, scheme.params().n as u64) as usize;
            ct.u.flip(pos);
            if scheme.decrypt(&kp.sk, &ct, &mut dec).ok() == Some(m) {
                ok += 1;
            }
        }
        assert!(ok >= 19);
    }

    #[test]
    fn file_formats() {
        let scheme = hqc();
        let params = scheme.params().clone();
        let kp = scheme.keygen_seeded(9);
        let ct = scheme
            .encrypt(&kp.pk, &message(9), &mut stream(9, Domain::Encryption, 0))
            .unwrap();

        let pk_bytes = kp.pk.to_bytes(&params);
        assert_eq!(&pk_bytes[..5], b"HQPK\x01");
        assert_eq!(PublicKey::from_bytes(&pk_bytes, &params).unwrap(), kp.pk);

        let sk_bytes = kp.sk.to_bytes(&params);
        assert_eq!(sk_bytes.len(), 5 + 2 * 4 * 67);
        assert_eq!(SecretKey::from_bytes(&sk_bytes, &params).unwrap(), kp.sk);

        let ct_bytes = ct.to_bytes(&params);
        assert_eq!(file_params(&ct_bytes).unwrap(), params);
        assert_eq!(Ciphertext::from_bytes(&ct_bytes, &params).unwrap(), ct);

        assert!(Ciphertext::from_bytes(&pk_bytes, &params).is_err());
        assert!(PublicKey::from_bytes(&pk_bytes[..pk_bytes.len() - 1], &params).is_err());
        let mut extra = sk_bytes.clone();
        extra.push(0);
        assert!(SecretKey::from_bytes(&extra, &params).is_err());
        let other = scheme_by_id(2).unwrap();
        assert!(PublicKey::from_bytes(&pk_bytes, &other).is_err());
    }
}

//! Reed-Solomon outer code concatenated with the duplicated Reed-Muller inner code.
//!
//! Outer symbol `b` (a GF(256) byte, bit 0 = constant term) is sent as the
//! inner codeword of message byte `b`. Block `i` of the binary codeword,
//! bits `i*n_i .. (i+1)*n_i`, carries outer symbol `i`.

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::gf256::Gf256;
use crate::ring::RingElement;
use crate::rm::RmCode;
use crate::rs::RsCode;

/// Plaintext size in bytes (`k_e * k_i = 256` bits).
pub const MESSAGE_BYTES: usize = 32;

/// A 256-bit plaintext; bit `8*i + j` is bit `j` of byte `i`.
pub type Message = [u8; MESSAGE_BYTES];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcatCode {
    outer: RsCode,
    inner: RmCode,
}

impl ConcatCode {
    pub fn new(outer: RsCode, inner: RmCode) -> Result<Self> {
        if outer.dimension() * 8 != MESSAGE_BYTES * 8 {
            return Err(Error::invalid(format!(
                "outer code dimension must be {MESSAGE_BYTES}, got {}",
                outer.dimension()
            )));
        }
        Ok(Self { outer, inner })
    }

    pub fn outer(&self) -> &RsCode {
        &self.outer
    }

    pub fn inner(&self) -> &RmCode {
        &self.inner
    }

    /// Binary length `N = n_e * n_i`.
    pub fn length(&self) -> usize {
        self.outer.length() * self.inner.length()
    }

    /// Binary dimension `K = k_e * k_i`.
    pub fn dimension(&self) -> usize {
        self.outer.dimension() * self.inner.dimension()
    }

    /// Product of the component distances, a lower bound on the true distance.
    pub fn design_distance(&self) -> usize {
        self.outer.min_distance() * self.inner.min_distance()
    }

    /// Encodes the outer symbols of an RS codeword into the binary word.
    pub fn encode_symbols(&self, symbols: &[Gf256]) -> RingElement {
        let ni = self.inner.length();
        let mut out = RingElement::zero(symbols.len() * ni);
        for (i, s) in symbols.iter().enumerate() {
            out.write_slice(i * ni, &self.inner.encode(s.0));
        }
        out
    }

    pub fn encode(&self, message: &Message) -> RingElement {
        let symbols: Vec<Gf256> = message.iter().map(|&b| Gf256(b)).collect();
        let outer = self
            .outer
            .encode(&symbols)
            .expect("message length matches dimension");
        self.encode_symbols(&outer)
    }

    /// Inner stage only: ML-decodes every block to an outer symbol.
    pub fn decode_inner(
        &self,
        received: &RingElement,
        rng: &mut impl RngCore,
    ) -> Result<Vec<Gf256>> {
        self.check_len(received)?;
        let ni = self.inner.length();
        Ok((0..self.outer.length())
            .map(|i| Gf256(self.inner.decode_block(received, i * ni, rng)))
            .collect())
    }

    /// Two-stage decoding. Succeeds whenever at most `delta_e` inner blocks
    /// decode to a wrong symbol; otherwise usually [`Error::DecodeFailure`].
    pub fn decode(&self, received: &RingElement, rng: &mut impl RngCore) -> Result<Message> {
        let symbols = self.decode_inner(received, rng)?;
        let message = self.outer.decode(&symbols)?;
        let mut out = [0u8; MESSAGE_BYTES];
        for (o, s) in out.iter_mut().zip(message) {
            *o = s.0;
        }
        Ok(out)
    }

    fn check_len(&self, received: &RingElement) -> Result<()> {
        if received.len() != self.length() {
            return Err(Error::invalid(format!(
                "received word has length {}, code length is {}",
                received.len(),
                self.length()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{bounded, stream, Domain};

    fn code_128() -> ConcatCode {
        ConcatCode::new(RsCode::with_length(80).unwrap(), RmCode::new(2).unwrap()).unwrap()
    }

    fn random_message(rng: &mut impl RngCore) -> Message {
        let mut m = [0u8; MESSAGE_BYTES];
        for b in m.iter_mut() {
            *b = rng.next_u64() as u8;
        }
        m
    }

    #[test]
    fn shape() {
        let c = code_128();
        assert_eq!(c.length(), 20480);
        assert_eq!(c.dimension(), 256);
        assert_eq!(c.design_distance(), 49 * 128);
    }

    #[test]
    fn zero_message_and_round_trip() {
        let c = code_128();
        assert!(c.encode(&[0; 32]).is_zero());
        let mut rng = stream(1, Domain::Message, 0);
        for _ in 0..20 {
            let m = random_message(&mut rng);
            assert_eq!(c.decode(&c.encode(&m), &mut rng).unwrap(), m);
        }
    }

    #[test]
    fn inner_blocks_carry_outer_symbols() {
        let c = code_128();
        let mut rng = stream(2, Domain::Message, 0);
        let m = random_message(&mut rng);
        let word = c.encode(&m);
        let symbols = c.decode_inner(&word, &mut rng).unwrap();
        let expect = c.outer().encode(&m.map(Gf256)).unwrap();
        assert_eq!(symbols, expect);
        // systematic part carries the plaintext bytes verbatim
        assert_eq!(
            symbols[48..].iter().map(|s| s.0).collect::<Vec<_>>(),
            m.to_vec()
        );
    }

    #[test]
    fn any_single_bit_flip_is_corrected() {
        let c = code_128();
        let mut rng = stream(3, Domain::Channel, 0);
        let m = random_message(&mut rng);
        let word = c.encode(&m);
        for _ in 0..200 {
            let mut r = word.clone();
            r.flip(bounded(&mut rng, c.length() as u64) as usize);
            assert_eq!(c.decode(&r, &mut rng).unwrap(), m);
        }
    }

    #[test]
    fn whole_block_corruption_up_to_delta() {
        let c = code_128();
        let mut rng = stream(4, Domain::Channel, 0);
        for _ in 0..1000 {
            let m = random_message(&mut rng);
            let mut r = c.encode(&m);
            let blocks = crate::ring::sample_fixed_weight(80, 24, &mut rng).unwrap();
            for b in blocks.iter() {
                let garbage = RingElement::random(256, &mut rng);
                for k in 0..256 {
                    r.set(b * 256 + k, garbage.get(k));
                }
            }
            assert_eq!(c.decode(&r, &mut rng).unwrap(), m);
        }
    }

    #[test]
    fn wrong_length_is_rejected() {
        let c = code_128();
        let mut rng = stream(5, Domain::Decoding, 0);
        assert!(matches!(
            c.decode(&RingElement::zero(100), &mut rng),
            Err(Error::InvalidArgument(_))
        ));
    }
}

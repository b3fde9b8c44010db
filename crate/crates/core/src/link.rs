//! One inner codeword through encoder, PAM4 mapper, AWGN channel, soft
//! decoder and (MLC) multi-stage demapper.

use rand::Rng;

use crate::codecs::{BchCode, SpcCode};
use crate::config::{InnerCode, InnerKey, Scheme};
use crate::error::Result;
use crate::inner_sd::{wagner_decode, ChaseConfig, ChaseDecoder};
use crate::interleaver::InnerPayload;
use crate::modem::{add_noise, bit_llrs, map_bicm, map_mlc, msd_demap, ChannelModel, FrameLayout};

#[derive(Clone, Debug)]
enum Decoder {
    Chase(BchCode, ChaseConfig),
    Wagner(SpcCode),
}

/// Encoder/decoder pair plus frame layout for one inner key.
#[derive(Clone, Debug)]
pub struct InnerLink {
    key: InnerKey,
    layout: FrameLayout,
    decoder: Decoder,
}

impl InnerLink {
    pub fn new(key: InnerKey) -> Result<InnerLink> {
        key.code.validate()?;
        let decoder = match key.code {
            InnerCode::Bch { n, b, t, extended, test_bits } => {
                Decoder::Chase(BchCode::new(b, t, n, extended)?, ChaseConfig { test_bits })
            }
            InnerCode::Spc { n } => Decoder::Wagner(SpcCode::new(n)?),
        };
        let layout = FrameLayout::new(key.scheme, key.code.n(), key.code.k())?;
        Ok(InnerLink { key, layout, decoder })
    }

    pub fn key(&self) -> InnerKey {
        self.key
    }

    pub fn layout(&self) -> &FrameLayout {
        &self.layout
    }

    pub fn k(&self) -> usize {
        self.layout.k()
    }

    /// PAM4 symbols in the decoder-output information region:
    /// `k/2` (BICM) or `k` (MLC).
    pub fn info_symbols(&self) -> usize {
        match self.key.scheme {
            Scheme::Bicm => self.k() / 2,
            Scheme::Mlc => self.k(),
        }
    }

    fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        match &self.decoder {
            Decoder::Chase(code, _) => code.encode(info),
            Decoder::Wagner(code) => code.encode(info),
        }
    }

    /// Sends `payload` over the channel and returns the receiver's estimate.
    pub fn transmit<R: Rng + ?Sized>(
        &self,
        payload: &InnerPayload,
        ch: &ChannelModel,
        rng: &mut R,
    ) -> Result<InnerPayload> {
        let cw = self.encode(&payload.coded)?;
        let mut samples = match self.key.scheme {
            Scheme::Bicm => map_bicm(&cw, &self.layout)?,
            Scheme::Mlc => map_mlc(&cw, &payload.unprotected, &self.layout)?,
        };
        add_noise(&mut samples, ch, rng);
        let frame = bit_llrs(&samples, &self.layout, ch)?;
        let coded = match &self.decoder {
            Decoder::Chase(code, cfg) => ChaseDecoder::new(code, *cfg)?.decode(&frame)?.info,
            Decoder::Wagner(code) => wagner_decode(&frame, code)?,
        };
        let unprotected = match self.key.scheme {
            Scheme::Bicm => Vec::new(),
            Scheme::Mlc => msd_demap(&samples, &coded, &self.layout)?,
        };
        Ok(InnerPayload { coded, unprotected })
    }

    /// Uniformly random payload.
    pub fn random_payload<R: Rng + ?Sized>(&self, rng: &mut R) -> InnerPayload {
        let k = self.k();
        let mut bits = |len: usize| (0..len).map(|_| rng.random::<bool>() as u8).collect::<Vec<u8>>();
        let coded = bits(k);
        let unprotected = bits(self.layout.unprotected_len());
        InnerPayload { coded, unprotected }
    }

    /// PAM4-symbol error count `U` between sent and received payloads.
    pub fn symbol_errors(&self, sent: &InnerPayload, got: &InnerPayload) -> usize {
        match self.key.scheme {
            Scheme::Bicm => sent
                .coded
                .chunks(2)
                .zip(got.coded.chunks(2))
                .filter(|(a, b)| a != b)
                .count(),
            Scheme::Mlc => (0..self.k())
                .filter(|&s| sent.coded[s] != got.coded[s] || sent.unprotected[s] != got.unprotected[s])
                .count(),
        }
    }

    /// Draws one random inner word and returns its error weight `U`.
    pub fn sample_weight<R: Rng + ?Sized>(&self, ch: &ChannelModel, rng: &mut R) -> Result<usize> {
        let sent = self.random_payload(rng);
        let got = self.transmit(&sent, ch, rng)?;
        Ok(self.symbol_errors(&sent, &got))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_links_are_error_free() {
        let ch = ChannelModel::from_snr_db(60.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for scheme in [Scheme::Bicm, Scheme::Mlc] {
            for code in [InnerCode::ebch(65, 7, 2, 2), InnerCode::Spc { n: 21 }] {
                let link = InnerLink::new(InnerKey { scheme, code }).unwrap();
                for _ in 0..20 {
                    assert_eq!(link.sample_weight(&ch, &mut rng).unwrap(), 0);
                }
            }
        }
    }

    #[test]
    fn weight_bounded_by_info_symbols() {
        let ch = ChannelModel::from_snr_db(3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let link = InnerLink::new(InnerKey { scheme: Scheme::Mlc, code: InnerCode::ebch(32, 5, 1, 2) }).unwrap();
        let mut seen = 0;
        for _ in 0..200 {
            let u = link.sample_weight(&ch, &mut rng).unwrap();
            assert!(u <= link.info_symbols());
            seen += u;
        }
        assert!(seen > 0);
    }
}

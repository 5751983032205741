//! Telemetry framing: known preamble, 32-bit length prefix, payload, CRC-32.

/// Preamble length in bits.
pub const PREAMBLE_BITS: usize = 512;
/// Run length of the alternating preamble blocks.
pub const PREAMBLE_BLOCK: usize = 16;
const LENGTH_BITS: usize = 32;
const CRC_BITS: usize = 32;

/// Blocks of 16 ones and 16 zeros, starting with ones.
pub fn preamble() -> Vec<u8> {
    (0..PREAMBLE_BITS)
        .map(|i| u8::from((i / PREAMBLE_BLOCK).is_multiple_of(2)))
        .collect()
}

/// Packs bits MSB-first; the last byte is zero-padded.
pub fn pack_bits(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (b << (7 - i)))
        })
        .collect()
}

pub fn unpack_bytes(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|&byte| (0..8).rev().map(move |i| (byte >> i) & 1))
        .collect()
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend((0..32).rev().map(|i| ((v >> i) & 1) as u8));
}

fn read_u32(bits: &[u8]) -> u32 {
    bits.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b))
}

pub fn crc_of(payload_bits: &[u8]) -> u32 {
    crc32fast::hash(&pack_bits(payload_bits))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TelemetryFrame {
    pub payload: Vec<u8>,
}

impl TelemetryFrame {
    pub fn new(payload: Vec<u8>) -> Self {
        Self { payload }
    }

    /// Bits on the air: preamble, length, payload, CRC.
    pub fn to_bits(&self) -> Vec<u8> {
        let mut bits = preamble();
        push_u32(&mut bits, self.payload.len() as u32);
        bits.extend_from_slice(&self.payload);
        push_u32(&mut bits, crc_of(&self.payload));
        bits
    }

    /// Position of the payload inside [`to_bits`](Self::to_bits).
    pub fn payload_offset() -> usize {
        PREAMBLE_BITS + LENGTH_BITS
    }

    pub fn len_bits(&self) -> usize {
        PREAMBLE_BITS + LENGTH_BITS + self.payload.len() + CRC_BITS
    }
}

/// What the receiver makes of the detected bits after the preamble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub length_ok: bool,
    pub crc_ok: bool,
    pub payload: Option<Vec<u8>>,
}

/// Parses `length | payload | crc` from the bits following the preamble.
/// A length that does not fill the received bits exactly marks the frame
/// corrupt without looking at the CRC.
pub fn decode(after_preamble: &[u8]) -> Decoded {
    if after_preamble.len() < LENGTH_BITS + CRC_BITS {
        return Decoded {
            length_ok: false,
            crc_ok: false,
            payload: None,
        };
    }
    let len = read_u32(&after_preamble[..LENGTH_BITS]) as usize;
    if len + LENGTH_BITS + CRC_BITS != after_preamble.len() {
        return Decoded {
            length_ok: false,
            crc_ok: false,
            payload: None,
        };
    }
    let payload = &after_preamble[LENGTH_BITS..LENGTH_BITS + len];
    let crc = read_u32(&after_preamble[LENGTH_BITS + len..]);
    let crc_ok = crc == crc_of(payload);
    Decoded {
        length_ok: true,
        crc_ok,
        payload: crc_ok.then(|| payload.to_vec()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preamble_shape() {
        let p = preamble();
        assert_eq!(p.len(), 512);
        assert!(p[..16].iter().all(|&b| b == 1));
        assert!(p[16..32].iter().all(|&b| b == 0));
        assert_eq!(p.iter().filter(|&&b| b == 1).count(), 256);
    }

    #[test]
    fn pack_round_trip() {
        let bytes = b"telemetry\x00\xff";
        assert_eq!(pack_bits(&unpack_bytes(bytes)), bytes.to_vec());
        assert_eq!(pack_bits(&[1, 0, 1]), vec![0b1010_0000]);
    }

    #[test]
    fn frame_round_trip_and_corruption() {
        let payload: Vec<u8> = (0..100).map(|i| (i % 3 == 0) as u8).collect();
        let f = TelemetryFrame::new(payload.clone());
        let bits = f.to_bits();
        assert_eq!(bits.len(), f.len_bits());
        let d = decode(&bits[PREAMBLE_BITS..]);
        assert!(d.length_ok && d.crc_ok);
        assert_eq!(d.payload.unwrap(), payload);

        let mut bad = bits.clone();
        bad[TelemetryFrame::payload_offset() + 5] ^= 1;
        let d = decode(&bad[PREAMBLE_BITS..]);
        assert!(d.length_ok && !d.crc_ok);

        let mut bad = bits;
        bad[PREAMBLE_BITS] ^= 1;
        assert!(!decode(&bad[PREAMBLE_BITS..]).length_ok);
    }

    #[test]
    fn known_crc() {
        // CRC-32/ISO-HDLC check value
        assert_eq!(crc32fast::hash(b"123456789"), 0xCBF4_3926);
    }
}

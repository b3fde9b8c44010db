use crate::error::{check_len, Error, Result};

/// Single-parity-check code SPC(n, n-1): `n - 1` information bits followed by
/// their parity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpcCode {
    n: usize,
}

impl SpcCode {
    pub fn new(n: usize) -> Result<SpcCode> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("SPC length {n} < 2")));
        }
        Ok(SpcCode { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.n - 1
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        check_len(self.k(), info.len())?;
        let mut cw: Vec<u8> = info.iter().map(|&b| b & 1).collect();
        let p = cw.iter().fold(0, |acc, &b| acc ^ b);
        cw.push(p);
        Ok(cw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_is_forced() {
        let code = SpcCode::new(4).unwrap();
        assert_eq!(code.encode(&[0, 0, 0]).unwrap(), vec![0, 0, 0, 0]);
        assert_eq!(code.encode(&[1, 0, 1]).unwrap(), vec![1, 0, 1, 0]);
        assert_eq!(code.encode(&[1, 1, 1]).unwrap(), vec![1, 1, 1, 1]);
        assert!(code.encode(&[1, 0]).is_err());
        assert!(SpcCode::new(1).is_err());
    }

    #[test]
    fn output_parity_even() {
        let code = SpcCode::new(9).unwrap();
        for m in 0..256u32 {
            let info: Vec<u8> = (0..8).map(|i| ((m >> i) & 1) as u8).collect();
            let cw = code.encode(&info).unwrap();
            assert_eq!(cw.iter().fold(0, |a, &b| a ^ b), 0);
        }
    }
}

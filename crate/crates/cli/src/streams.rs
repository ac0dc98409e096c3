//! Named RNG streams fanned out from the master seed.

use std::collections::BTreeMap;

use fedabc::RngHandle;
use sha2::{Digest, Sha256};

pub const DATAPREP: &str = "dataprep";
pub const SYNTHETIC: &str = "synthetic";
pub const GLOBAL_MOAE: &str = "moae/global";
pub const PILOT: &str = "server/pilot";
pub const INFER: &str = "server/infer";
pub const DELIVER: &str = "server/deliver";
pub const EVALUATION: &str = "evaluation";

pub fn site_moae(site_id: u32) -> String {
    format!("moae/site/{site_id}")
}

/// Stream id of a name: the first eight bytes of its SHA-256 digest.
pub fn stream_id(name: &str) -> u64 {
    let digest = Sha256::digest(name.as_bytes());
    u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Debug, Clone, Default)]
pub struct Streams {
    master: u64,
    used: BTreeMap<String, u64>,
}

impl Streams {
    pub fn new(master: u64) -> Self {
        Self {
            master,
            used: BTreeMap::new(),
        }
    }

    pub fn get(&mut self, name: &str) -> RngHandle {
        let id = stream_id(name);
        self.used.insert(name.to_string(), id);
        RngHandle::new(self.master, id)
    }

    /// Master seed plus the id of every stream handed out so far.
    pub fn record(&self) -> BTreeMap<String, u64> {
        let mut out = self.used.clone();
        out.insert("master".into(), self.master);
        out
    }
}

//! The CSP as a concurrent service.
//!
//! Readers clone an `Arc` snapshot and never block on index construction.
//! Writers are serialized by `writer`; each write publishes a new snapshot.

use std::sync::{Arc, Mutex, RwLock};
use std::thread::JoinHandle;

use privsnp_core::csp::{prepare_index, CspStore, QueryError, QueryRequest, QueryResponse, SearchMode};
use privsnp_core::hospital::{AsiCiphertext, Pseudonym, SharedKey};
use privsnp_core::indexing::{merge_heuristic, EncryptedIndex};
use privsnp_core::abe::AbeKeys;
use privsnp_core::params::SystemParams;
use rand::rngs::OsRng;
use std::collections::BTreeMap;

use crate::error::Result;
use crate::wire::{self, Request, Response};

#[derive(Clone, Copy, Debug)]
pub struct ServiceOptions {
    pub merge_threshold: usize,
    pub fast_merge: bool,
    pub mode: SearchMode,
}

struct Inner {
    snapshot: RwLock<Arc<CspStore>>,
    writer: Mutex<()>,
    merges: Mutex<Vec<JoinHandle<()>>>,
    opts: ServiceOptions,
}

#[derive(Clone)]
pub struct CspService(Arc<Inner>);

impl CspService {
    pub fn new(params: SystemParams, opts: ServiceOptions) -> Self {
        Self(Arc::new(Inner {
            snapshot: RwLock::new(Arc::new(CspStore::new(params))),
            writer: Mutex::new(()),
            merges: Mutex::new(Vec::new()),
            opts,
        }))
    }

    pub fn snapshot(&self) -> Arc<CspStore> {
        self.0.snapshot.read().unwrap().clone()
    }

    fn write<T>(&self, f: impl FnOnce(&mut CspStore) -> T) -> T {
        let _w = self.0.writer.lock().unwrap();
        let mut guard = self.0.snapshot.write().unwrap();
        f(Arc::make_mut(&mut guard))
    }

    /// Clusters outside the writer lock, then publishes.
    pub fn upload_index(&self, hospital: &str, index: &EncryptedIndex) -> Result<()> {
        let params = *self.snapshot().params();
        let hier = prepare_index(&params, index)?;
        let count = self.write(|s| s.insert_index(hospital, hier).map(|_| s.index_count()))?;
        if merge_heuristic(count, self.0.opts.merge_threshold) {
            self.spawn_merge();
        }
        Ok(())
    }

    pub fn upload_ciphertexts(
        &self,
        hospital: &str,
        snp_blob: Vec<u8>,
        asi: BTreeMap<Pseudonym, Vec<AsiCiphertext>>,
        abe: AbeKeys,
    ) {
        self.write(|s| s.upload_ciphertexts(hospital, snp_blob, asi, abe));
    }

    pub fn register_shared_key(&self, hospital: &str, client: &str, key: SharedKey) {
        self.write(|s| s.register_shared_key(hospital, client, key));
    }

    fn spawn_merge(&self) {
        let me = self.clone();
        let handle = std::thread::spawn(move || {
            if let Err(e) = me.merge_now() {
                log::warn!("background merge failed: {e}");
            }
        });
        self.0.merges.lock().unwrap().push(handle);
    }

    /// Builds a merged index from the current snapshot and installs it.
    /// Returns false when an upload raced the build; that upload schedules
    /// its own merge if the heuristic still fires.
    pub fn merge_now(&self) -> Result<bool> {
        let snap = self.snapshot();
        if snap.index_count() == 0 {
            return Ok(false);
        }
        let merged = snap.build_merged(self.0.opts.fast_merge)?;
        let installed = self.write(|s| s.install_merged(merged));
        log::info!("merged {} indices: installed={installed}", snap.index_count());
        Ok(installed)
    }

    pub fn wait_for_merge(&self) {
        let handles: Vec<_> = std::mem::take(&mut *self.0.merges.lock().unwrap());
        for h in handles {
            let _ = h.join();
        }
    }

    pub fn query(&self, client: &str, request: &QueryRequest) -> Result<QueryResponse, QueryError> {
        self.snapshot().handle_query(client, request, self.0.opts.mode, &mut OsRng)
    }

    pub fn handle(&self, req: Request) -> Response {
        match self.dispatch(req) {
            Ok(r) => r,
            Err(e) => Response::error("bad_request", e),
        }
    }

    fn dispatch(&self, req: Request) -> Result<Response> {
        Ok(match req {
            Request::UploadIndex { hospital_id, index_blob, sigma } => {
                let ix = wire::parse_upload_index(&index_blob, &sigma)?;
                match self.upload_index(&hospital_id, &ix) {
                    Ok(()) => Response::Ok,
                    Err(e) => Response::error("rejected_index", e),
                }
            }
            Request::UploadCiphertexts { hospital_id, snp_blob, asi_entries, abe_pk, abe_mk } => {
                let asi = wire::parse_asi_entries(&asi_entries)?;
                let abe = wire::parse_abe_keys(&abe_pk, &abe_mk)?;
                self.upload_ciphertexts(&hospital_id, snp_blob, asi, abe);
                Response::Ok
            }
            Request::RegisterSharedKey { hospital_id, client_id, delta, cbf_blob } => {
                let key = wire::parse_shared_key(&delta, &cbf_blob)?;
                self.register_shared_key(&hospital_id, &client_id, key);
                Response::Ok
            }
            Request::Query(msg) => {
                let request = msg.to_request()?;
                match self.query(&msg.client_id, &request) {
                    Ok(r) => Response::from(&r),
                    Err(e) => Response::error(e.code(), e),
                }
            }
            Request::MergeNow => {
                self.merge_now()?;
                Response::Ok
            }
        })
    }
}

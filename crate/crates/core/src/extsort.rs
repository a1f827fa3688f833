//! External merge sort over serde-serializable records.
//!
//! Records are buffered up to `run_size`, sorted, and spilled to anonymous
//! temporary files (unlinked on creation, so nothing is left behind). A
//! k-way heap merge then streams them back in order; when there are more runs
//! than `max_fan_in`, intermediate merge passes reduce them first.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Seek, SeekFrom, Write};
use std::marker::PhantomData;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortConfig {
    /// Maximum records held in memory before a run is spilled.
    pub run_size: usize,
    /// Where spill files go; the system temp directory when unset.
    pub spill_dir: Option<PathBuf>,
    pub max_fan_in: usize,
}

impl Default for SortConfig {
    fn default() -> Self {
        Self {
            run_size: 100_000,
            spill_dir: None,
            max_fan_in: 64,
        }
    }
}

impl SortConfig {
    /// Copy of this config with the run size divided between `parts` sorters.
    pub fn split(&self, parts: usize) -> SortConfig {
        SortConfig {
            run_size: (self.run_size / parts.max(1)).max(1),
            ..self.clone()
        }
    }

    fn spill_file(&self) -> io::Result<File> {
        match &self.spill_dir {
            Some(dir) => tempfile::tempfile_in(dir),
            None => tempfile::tempfile(),
        }
    }
}

#[allow(clippy::boxed_local)]
fn bincode_to_io(err: bincode::Error) -> io::Error {
    match *err {
        bincode::ErrorKind::Io(e) => e,
        other => io::Error::new(io::ErrorKind::InvalidData, other.to_string()),
    }
}

struct Run {
    file: File,
    len: u64,
}

pub struct ExternalSorter<T> {
    config: SortConfig,
    buffer: Vec<T>,
    runs: Vec<Run>,
    spilled_records: u64,
}

impl<T> ExternalSorter<T>
where
    T: Ord + Serialize + DeserializeOwned,
{
    /// Fails up front if a spill directory is configured but not writable.
    pub fn new(config: SortConfig) -> io::Result<Self> {
        if config.spill_dir.is_some() {
            config.spill_file()?;
        }
        Ok(Self {
            buffer: Vec::with_capacity(config.run_size.min(1 << 16)),
            config,
            runs: Vec::new(),
            spilled_records: 0,
        })
    }

    pub fn push(&mut self, item: T) -> io::Result<()> {
        self.buffer.push(item);
        if self.buffer.len() >= self.config.run_size.max(1) {
            self.spill()?;
        }
        Ok(())
    }

    /// Number of runs written to disk so far.
    pub fn spilled_runs(&self) -> usize {
        self.runs.len()
    }

    pub fn spilled_records(&self) -> u64 {
        self.spilled_records
    }

    fn spill(&mut self) -> io::Result<()> {
        if self.buffer.is_empty() {
            return Ok(());
        }
        self.buffer.sort_unstable();
        let items = std::mem::take(&mut self.buffer);
        let run = write_run(&self.config, items.into_iter().map(Ok))?;
        self.spilled_records += run.len;
        self.runs.push(run);
        Ok(())
    }

    /// Sorted stream of everything pushed.
    pub fn finish(self) -> io::Result<SortedIter<T>> {
        merge_sorters(vec![self])
    }
}

fn write_run<T: Serialize>(config: &SortConfig, items: impl Iterator<Item = io::Result<T>>) -> io::Result<Run> {
    let mut file = config.spill_file()?;
    let mut len = 0;
    {
        let mut writer = BufWriter::with_capacity(1 << 16, &mut file);
        for item in items {
            bincode::serialize_into(&mut writer, &item?).map_err(bincode_to_io)?;
            len += 1;
        }
        writer.flush()?;
    }
    file.seek(SeekFrom::Start(0))?;
    Ok(Run { file, len })
}

enum Source<T> {
    Memory(std::vec::IntoIter<T>),
    Disk {
        reader: BufReader<File>,
        remaining: u64,
    },
}

impl<T: DeserializeOwned> Source<T> {
    fn next_item(&mut self) -> io::Result<Option<T>> {
        match self {
            Source::Memory(items) => Ok(items.next()),
            Source::Disk { reader, remaining } => {
                if *remaining == 0 {
                    return Ok(None);
                }
                *remaining -= 1;
                bincode::deserialize_from(reader).map(Some).map_err(bincode_to_io)
            }
        }
    }
}

struct HeapItem<T> {
    item: T,
    source: usize,
}

impl<T: Ord> PartialEq for HeapItem<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Ord> Eq for HeapItem<T> {}

impl<T: Ord> PartialOrd for HeapItem<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Ord> Ord for HeapItem<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.item.cmp(&other.item).then(self.source.cmp(&other.source))
    }
}

/// K-way merge over sorted sources.
pub struct SortedIter<T> {
    sources: Vec<Source<T>>,
    heap: BinaryHeap<Reverse<HeapItem<T>>>,
    failed: bool,
    _marker: PhantomData<T>,
}

impl<T: Ord + DeserializeOwned> SortedIter<T> {
    fn new(mut sources: Vec<Source<T>>) -> io::Result<Self> {
        let mut heap = BinaryHeap::with_capacity(sources.len());
        for (i, source) in sources.iter_mut().enumerate() {
            if let Some(item) = source.next_item()? {
                heap.push(Reverse(HeapItem { item, source: i }));
            }
        }
        Ok(Self {
            sources,
            heap,
            failed: false,
            _marker: PhantomData,
        })
    }
}

impl<T: Ord + DeserializeOwned> Iterator for SortedIter<T> {
    type Item = io::Result<T>;

    fn next(&mut self) -> Option<io::Result<T>> {
        if self.failed {
            return None;
        }
        let Reverse(top) = self.heap.pop()?;
        match self.sources[top.source].next_item() {
            Ok(Some(item)) => self.heap.push(Reverse(HeapItem {
                item,
                source: top.source,
            })),
            Ok(None) => {}
            Err(err) => {
                self.failed = true;
                return Some(Err(err));
            }
        }
        Some(Ok(top.item))
    }
}

/// Merges the contents of several sorters (for example one per worker)
/// into a single sorted stream.
pub fn merge_sorters<T>(sorters: Vec<ExternalSorter<T>>) -> io::Result<SortedIter<T>>
where
    T: Ord + Serialize + DeserializeOwned,
{
    let Some(config) = sorters.first().map(|s| s.config.clone()) else {
        return SortedIter::new(Vec::new());
    };
    let fan_in = config.max_fan_in.max(2);

    let mut runs = Vec::new();
    let mut memory = Vec::new();
    for mut sorter in sorters {
        runs.append(&mut sorter.runs);
        let mut buffer = std::mem::take(&mut sorter.buffer);
        buffer.sort_unstable();
        if !buffer.is_empty() {
            memory.push(buffer);
        }
    }

    while runs.len() + memory.len() > fan_in {
        let take = fan_in.min(runs.len());
        if take < 2 {
            break;
        }
        let batch: Vec<Run> = runs.drain(..take).collect();
        let merged = SortedIter::<T>::new(batch.into_iter().map(disk_source).collect())?;
        runs.push(write_run(&config, merged)?);
    }

    let mut sources: Vec<Source<T>> = runs.into_iter().map(disk_source).collect();
    sources.extend(memory.into_iter().map(|m| Source::Memory(m.into_iter())));
    SortedIter::new(sources)
}

fn disk_source<T>(run: Run) -> Source<T> {
    Source::Disk {
        reader: BufReader::with_capacity(1 << 16, run.file),
        remaining: run.len,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sort_all(items: Vec<u64>, config: SortConfig) -> Vec<u64> {
        let mut sorter = ExternalSorter::new(config).unwrap();
        for i in items {
            sorter.push(i).unwrap();
        }
        sorter.finish().unwrap().map(Result::unwrap).collect()
    }

    #[test]
    fn empty_input() {
        assert!(sort_all(vec![], SortConfig::default()).is_empty());
        assert_eq!(merge_sorters::<u64>(vec![]).unwrap().count(), 0);
    }

    #[test]
    fn spills_and_multi_pass_merge() {
        let config = SortConfig {
            run_size: 3,
            spill_dir: None,
            max_fan_in: 2,
        };
        let items: Vec<u64> = (0..50).rev().collect();
        let mut sorter = ExternalSorter::new(config).unwrap();
        for &i in &items {
            sorter.push(i).unwrap();
        }
        assert!(sorter.spilled_runs() >= 16);
        let out: Vec<u64> = sorter.finish().unwrap().map(Result::unwrap).collect();
        assert_eq!(out, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn unwritable_spill_dir_fails_early() {
        let config = SortConfig {
            spill_dir: Some(PathBuf::from("/nonexistent/spill")),
            ..SortConfig::default()
        };
        assert!(ExternalSorter::<u64>::new(config).is_err());
    }

    #[test]
    fn merges_several_sorters() {
        let config = SortConfig {
            run_size: 4,
            ..SortConfig::default()
        };
        let mut a = ExternalSorter::new(config.clone()).unwrap();
        let mut b = ExternalSorter::new(config).unwrap();
        for i in 0..20u64 {
            if i % 3 == 0 { a.push(i).unwrap() } else { b.push(i).unwrap() }
        }
        let out: Vec<u64> = merge_sorters(vec![a, b]).unwrap().map(Result::unwrap).collect();
        assert_eq!(out, (0..20).collect::<Vec<_>>());
    }

    proptest! {
        #[test]
        fn matches_in_memory_sort(items in proptest::collection::vec(any::<u32>(), 0..300), run in 1usize..40, fan in 2usize..6) {
            let mut expected: Vec<u64> = items.iter().map(|&x| x as u64).collect();
            let got = sort_all(expected.clone(), SortConfig { run_size: run, spill_dir: None, max_fan_in: fan });
            expected.sort();
            prop_assert_eq!(got, expected);
        }
    }
}

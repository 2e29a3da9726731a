//! On-disk dataset and prediction files.
//!
//! Dataset (`NDW1`), all integers little-endian:
//!
//! | offset | size   | field                                  |
//! |--------|--------|----------------------------------------|
//! | 0      | 4      | magic `NDW1`                           |
//! | 4      | 1      | cipher tag (1 DES, 2 Chaskey, 3 PRESENT) |
//! | 5      | 1      | rounds                                 |
//! | 6      | 2      | m                                      |
//! | 8      | 2      | ω                                      |
//! | 10     | 2      | L (block bits)                         |
//! | 12     | 8      | group count                            |
//! | 20     | 8      | seed                                   |
//! | 28     | L/8    | Δ, big-endian (MSB-first)              |
//!
//! followed by one label byte per group, then the packed tensors of every
//! group (`ceil(m·ω·(2L/ω) / 8)` bytes each, see
//! [`BitTensor`](crate::sampling::BitTensor)).
//!
//! Predictions (`NDP1`): magic, count (u64), then `count` f32 values in
//! `[0, 1]`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use crate::ciphers::{Block, CipherId};
use crate::sampling::{BitTensor, GenSpec, GroupSize, LabeledGroup, TensorLayout};
use crate::{Error, Result};

pub const DATASET_MAGIC: [u8; 4] = *b"NDW1";
pub const PREDICTION_MAGIC: [u8; 4] = *b"NDP1";

const FIXED_HEADER_LEN: usize = 28;
const LABEL_CHUNK: usize = 1 << 16;
const TENSOR_CHUNK_BYTES: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetHeader {
    pub cipher: CipherId,
    pub rounds: u8,
    pub m: u16,
    pub omega: u16,
    pub block_bits: u16,
    pub group_count: u64,
    pub seed: u64,
    pub delta: Block,
}

impl DatasetHeader {
    pub fn from_spec(spec: &GenSpec) -> Self {
        DatasetHeader {
            cipher: spec.cipher,
            rounds: spec.rounds as u8,
            m: spec.m(),
            omega: spec.layout.omega(),
            block_bits: spec.cipher.block_bits() as u16,
            group_count: spec.group_count,
            seed: spec.seed,
            delta: spec.delta.block(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.cipher.block_bits();
        if self.block_bits as u32 != l {
            return Err(Error::format(format!(
                "{} has L = {l}, header says {}",
                self.cipher, self.block_bits
            )));
        }
        if self.delta.bits() != l {
            return Err(Error::format("difference width does not match L"));
        }
        if self.group_count == 0 {
            return Err(Error::format("group count is zero"));
        }
        self.cipher.check_rounds(self.rounds as u32)?;
        self.layout()?;
        Ok(())
    }

    pub fn layout(&self) -> Result<TensorLayout> {
        TensorLayout::new(self.block_bits as u32, GroupSize::new(self.m)?, self.omega)
    }

    pub fn header_len(&self) -> u64 {
        (FIXED_HEADER_LEN + self.block_bits as usize / 8) as u64
    }

    pub fn group_bytes(&self) -> Result<u64> {
        Ok(self.layout()?.bytes_per_group() as u64)
    }

    pub fn labels_offset(&self) -> u64 {
        self.header_len()
    }

    pub fn tensors_offset(&self) -> u64 {
        self.header_len() + self.group_count
    }

    pub fn file_len(&self) -> Result<u64> {
        Ok(self.tensors_offset() + self.group_count * self.group_bytes()?)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.header_len() as usize);
        out.extend_from_slice(&DATASET_MAGIC);
        out.push(self.cipher.tag());
        out.push(self.rounds);
        out.extend_from_slice(&self.m.to_le_bytes());
        out.extend_from_slice(&self.omega.to_le_bytes());
        out.extend_from_slice(&self.block_bits.to_le_bytes());
        out.extend_from_slice(&self.group_count.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.delta.to_be_bytes());
        out
    }

    pub fn decode<R: Read>(r: &mut R) -> Result<Self> {
        let mut fixed = [0u8; FIXED_HEADER_LEN];
        read_exact_or_truncated(r, &mut fixed, "dataset header")?;
        if fixed[..4] != DATASET_MAGIC {
            return Err(Error::format(format!(
                "bad dataset magic {:?}",
                &fixed[..4]
            )));
        }
        let u16_at = |i: usize| u16::from_le_bytes([fixed[i], fixed[i + 1]]);
        let u64_at = |i: usize| u64::from_le_bytes(fixed[i..i + 8].try_into().unwrap());
        let cipher = CipherId::from_tag(fixed[4])?;
        let block_bits = u16_at(10);
        if block_bits as u32 != cipher.block_bits() {
            return Err(Error::format(format!(
                "{cipher} has L = {}, header says {block_bits}",
                cipher.block_bits()
            )));
        }
        let mut delta = vec![0u8; block_bits as usize / 8];
        read_exact_or_truncated(r, &mut delta, "dataset header")?;
        let header = DatasetHeader {
            cipher,
            rounds: fixed[5],
            m: u16_at(6),
            omega: u16_at(8),
            block_bits,
            group_count: u64_at(12),
            seed: u64_at(20),
            delta: Block::from_be_bytes(&delta)?,
        };
        header.validate()?;
        Ok(header)
    }
}

fn read_exact_or_truncated<R: Read>(r: &mut R, buf: &mut [u8], what: &'static str) -> Result<()> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => {
                return Err(Error::Truncation {
                    what,
                    unit: "bytes",
                    expected: buf.len() as u64,
                    actual: filled as u64,
                })
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

/// Single-writer dataset sink. Tensors stream to their final position;
/// labels are buffered (one byte per group) and written on [`finish`](Self::finish).
pub struct DatasetWriter<W: Write + Seek> {
    out: W,
    header: DatasetHeader,
    layout: TensorLayout,
    labels: Vec<u8>,
    offset: u64,
}

impl<W: Write + Seek> DatasetWriter<W> {
    pub fn new(mut out: W, header: DatasetHeader) -> Result<Self> {
        header.validate().map_err(|e| match e {
            Error::Format(msg) => Error::Shape(msg),
            other => other,
        })?;
        let layout = header.layout()?;
        out.write_all(&header.encode()).map_err(Error::io_at(0))?;
        let offset = header.tensors_offset();
        out.seek(SeekFrom::Start(offset))
            .map_err(Error::io_at(offset))?;
        Ok(DatasetWriter {
            out,
            labels: Vec::with_capacity(header.group_count.min(1 << 24) as usize),
            header,
            layout,
            offset,
        })
    }

    pub fn header(&self) -> &DatasetHeader {
        &self.header
    }

    pub fn write_group(&mut self, group: &LabeledGroup) -> Result<()> {
        if self.labels.len() as u64 >= self.header.group_count {
            return Err(Error::Range(format!(
                "more than {} groups written",
                self.header.group_count
            )));
        }
        if group.label > 1 {
            return Err(Error::Range(format!("label {} is not 0/1", group.label)));
        }
        if *group.tensor.layout() != self.layout {
            return Err(Error::shape("group layout does not match header"));
        }
        let bytes = group.tensor.as_bytes();
        self.out
            .write_all(bytes)
            .map_err(Error::io_at(self.offset))?;
        self.offset += bytes.len() as u64;
        self.labels.push(group.label);
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        if self.labels.len() as u64 != self.header.group_count {
            return Err(Error::Truncation {
                what: "group stream",
                unit: "groups",
                expected: self.header.group_count,
                actual: self.labels.len() as u64,
            });
        }
        let at = self.header.labels_offset();
        self.out
            .seek(SeekFrom::Start(at))
            .map_err(Error::io_at(at))?;
        self.out.write_all(&self.labels).map_err(Error::io_at(at))?;
        self.out.seek(SeekFrom::End(0)).map_err(Error::io_at(at))?;
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Writes a complete dataset from an iterator of groups.
pub fn write_dataset<W, I>(out: W, header: DatasetHeader, groups: I) -> Result<W>
where
    W: Write + Seek,
    I: IntoIterator<Item = LabeledGroup>,
{
    let mut writer = DatasetWriter::new(out, header)?;
    for g in groups {
        writer.write_group(&g)?;
    }
    writer.finish()
}

/// Streaming, constant-memory dataset reader.
pub struct DatasetReader<R: Read + Seek> {
    src: R,
    header: DatasetHeader,
    layout: TensorLayout,
    group_bytes: usize,
    next: u64,
    labels: Vec<u8>,
    labels_start: u64,
    tensors: Vec<u8>,
    tensors_start: u64,
}

pub type FileDatasetReader = DatasetReader<BufReader<File>>;

impl<R: Read + Seek> DatasetReader<R> {
    /// Parses the header and checks the total length against it.
    pub fn new(mut src: R) -> Result<Self> {
        src.seek(SeekFrom::Start(0))?;
        let header = DatasetHeader::decode(&mut src)?;
        let expected = header.file_len()?;
        let actual = src.seek(SeekFrom::End(0))?;
        if actual != expected {
            return Err(Error::Truncation {
                what: "dataset",
                unit: "bytes",
                expected,
                actual,
            });
        }
        let layout = header.layout()?;
        Ok(DatasetReader {
            src,
            group_bytes: layout.bytes_per_group(),
            layout,
            header,
            next: 0,
            labels: Vec::new(),
            labels_start: 0,
            tensors: Vec::new(),
            tensors_start: 0,
        })
    }

    pub fn header(&self) -> &DatasetHeader {
        &self.header
    }

    pub fn layout(&self) -> &TensorLayout {
        &self.layout
    }

    fn read_at(&mut self, offset: u64, buf: &mut [u8]) -> Result<()> {
        self.src
            .seek(SeekFrom::Start(offset))
            .map_err(Error::io_at(offset))?;
        self.src.read_exact(buf).map_err(Error::io_at(offset))
    }

    fn check_label(&self, index: u64, label: u8) -> Result<u8> {
        if label > 1 {
            return Err(Error::format(format!("group {index} has label {label}")));
        }
        Ok(label)
    }

    /// Random access to group `index`.
    pub fn read_group(&mut self, index: u64) -> Result<LabeledGroup> {
        if index >= self.header.group_count {
            return Err(Error::Range(format!(
                "group {index} beyond {}",
                self.header.group_count
            )));
        }
        let mut label = [0u8];
        self.read_at(self.header.labels_offset() + index, &mut label)?;
        let mut bytes = vec![0u8; self.group_bytes];
        let at = self.header.tensors_offset() + index * self.group_bytes as u64;
        self.read_at(at, &mut bytes)?;
        Ok(LabeledGroup {
            label: self.check_label(index, label[0])?,
            tensor: BitTensor::from_bytes(self.layout, bytes)?,
        })
    }

    /// All labels, in group order.
    pub fn read_labels(&mut self) -> Result<Vec<u8>> {
        let mut labels = vec![0u8; self.header.group_count as usize];
        self.read_at(self.header.labels_offset(), &mut labels)?;
        for (i, &l) in labels.iter().enumerate() {
            self.check_label(i as u64, l)?;
        }
        Ok(labels)
    }

    fn next_group(&mut self) -> Result<LabeledGroup> {
        let i = self.next;
        let count = self.header.group_count;
        if i >= self.labels_start + self.labels.len() as u64 {
            let n = (count - i).min(LABEL_CHUNK as u64) as usize;
            let mut buf = std::mem::take(&mut self.labels);
            buf.resize(n, 0);
            self.read_at(self.header.labels_offset() + i, &mut buf)?;
            self.labels = buf;
            self.labels_start = i;
        }
        let per_chunk = (TENSOR_CHUNK_BYTES / self.group_bytes).max(1) as u64;
        if i >= self.tensors_start + (self.tensors.len() / self.group_bytes) as u64 {
            let n = (count - i).min(per_chunk) as usize;
            let mut buf = std::mem::take(&mut self.tensors);
            buf.resize(n * self.group_bytes, 0);
            let at = self.header.tensors_offset() + i * self.group_bytes as u64;
            self.read_at(at, &mut buf)?;
            self.tensors = buf;
            self.tensors_start = i;
        }
        let label = self.labels[(i - self.labels_start) as usize];
        let start = (i - self.tensors_start) as usize * self.group_bytes;
        let bytes = self.tensors[start..start + self.group_bytes].to_vec();
        self.next += 1;
        Ok(LabeledGroup {
            label: self.check_label(i, label)?,
            tensor: BitTensor::from_bytes(self.layout, bytes)?,
        })
    }
}

impl<R: Read + Seek> Iterator for DatasetReader<R> {
    type Item = Result<LabeledGroup>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.header.group_count {
            return None;
        }
        let item = self.next_group();
        if item.is_err() {
            self.next = self.header.group_count;
        }
        Some(item)
    }
}

fn check_predictions(preds: &[f32]) -> Result<()> {
    match preds
        .iter()
        .enumerate()
        .find(|(_, p)| !(0.0..=1.0).contains(*p))
    {
        Some((i, p)) => Err(Error::Range(format!("prediction {i} = {p} outside [0, 1]"))),
        None => Ok(()),
    }
}

pub fn open_dataset(path: &Path) -> Result<FileDatasetReader> {
    DatasetReader::new(BufReader::new(File::open(path)?))
}

/// Writes a prediction file. Every value must lie in `[0, 1]`.
pub fn write_predictions<W: Write>(mut out: W, preds: &[f32]) -> Result<W> {
    check_predictions(preds)?;
    out.write_all(&PREDICTION_MAGIC)?;
    out.write_all(&(preds.len() as u64).to_le_bytes())?;
    for p in preds {
        out.write_all(&p.to_le_bytes())?;
    }
    out.flush()?;
    Ok(out)
}

pub fn write_predictions_file(path: &Path, preds: &[f32]) -> Result<()> {
    // Validate first so a bad vector never leaves a partial file behind.
    check_predictions(preds)?;
    write_predictions(BufWriter::new(File::create(path)?), preds)?.flush()?;
    Ok(())
}

pub fn read_predictions<R: Read>(mut src: R) -> Result<Vec<f32>> {
    let mut head = [0u8; 12];
    read_exact_or_truncated(&mut src, &mut head, "prediction header")?;
    if head[..4] != PREDICTION_MAGIC {
        return Err(Error::format(format!(
            "bad prediction magic {:?}",
            &head[..4]
        )));
    }
    let count = u64::from_le_bytes(head[4..].try_into().unwrap());
    let mut body = Vec::new();
    src.read_to_end(&mut body)?;
    let expected = count
        .checked_mul(4)
        .ok_or_else(|| Error::format("count overflows"))?;
    if body.len() as u64 != expected {
        return Err(Error::Truncation {
            what: "prediction body",
            unit: "bytes",
            expected,
            actual: body.len() as u64,
        });
    }
    body.chunks_exact(4)
        .enumerate()
        .map(|(i, c)| {
            let p = f32::from_le_bytes(c.try_into().unwrap());
            if (0.0..=1.0).contains(&p) {
                Ok(p)
            } else {
                Err(Error::Range(format!("prediction {i} = {p} outside [0, 1]")))
            }
        })
        .collect()
}

pub fn read_predictions_file(path: &Path) -> Result<Vec<f32>> {
    read_predictions(BufReader::new(File::open(path)?))
}

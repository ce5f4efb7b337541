//! Discrete decision tables and the indiscernibility partitions built on them.
//!
//! Objects are addressed by their row index. Attributes are addressed by column
//! index: condition attributes occupy `0..n_conditions()` and the decision
//! attribute sits at index `n_conditions()`. Name-based lookups resolve to the
//! same indices.

use std::collections::{HashMap, HashSet};
use std::io;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantize::{QuantizedRecord, RiskLevel};

/// Discrete attribute level.
pub type Level = u8;

/// Exact ratio of two counts. Used for inclusion degrees, classification
/// quality and the precision parameter so threshold tests never round.
pub type Degree = Ratio<u64>;

/// How decision codes map to printable labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecisionCoding {
    /// Codes are `RiskLevel` codes, printed as `Low`/`Moderate`/`High`.
    Risk,
    /// Codes are plain integers, printed as numbers.
    Numeric,
}

impl DecisionCoding {
    pub fn label(self, code: Level) -> String {
        match (self, RiskLevel::from_code(code)) {
            (DecisionCoding::Risk, Some(level)) => level.name().to_string(),
            _ => code.to_string(),
        }
    }

    pub fn parse(self, label: &str) -> Option<Level> {
        match self {
            DecisionCoding::Risk => label.parse::<RiskLevel>().ok().map(RiskLevel::code),
            DecisionCoding::Numeric => label.parse().ok(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionTable {
    condition_names: Vec<String>,
    decision_name: String,
    /// Column-major condition values.
    columns: Vec<Vec<Level>>,
    decision: Vec<Level>,
    coding: DecisionCoding,
    /// Sorted distinct decision values.
    decision_values: Vec<Level>,
    /// Per object, position of its decision value in `decision_values`.
    decision_index: Vec<usize>,
}

impl DecisionTable {
    /// Builds a table from row-major condition values and a decision column.
    pub fn new(
        condition_names: Vec<String>,
        decision_name: impl Into<String>,
        rows: Vec<Vec<Level>>,
        decision: Vec<Level>,
    ) -> Result<Self> {
        let decision_name = decision_name.into();
        let mut seen = HashSet::new();
        for name in condition_names
            .iter()
            .chain(std::iter::once(&decision_name))
        {
            if !seen.insert(name.as_str()) {
                return Err(Error::Domain(format!("duplicate attribute `{name}`")));
            }
        }
        if rows.len() != decision.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: decision.len(),
            });
        }
        let width = condition_names.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); width];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Domain(format!(
                    "object {i} has {} condition values, expected {width}",
                    row.len()
                )));
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Ok(Self::from_columns(
            condition_names,
            decision_name,
            columns,
            decision,
            DecisionCoding::Numeric,
        ))
    }

    fn from_columns(
        condition_names: Vec<String>,
        decision_name: String,
        columns: Vec<Vec<Level>>,
        decision: Vec<Level>,
        coding: DecisionCoding,
    ) -> Self {
        let mut decision_values = decision.clone();
        decision_values.sort_unstable();
        decision_values.dedup();
        let decision_index = decision
            .iter()
            .map(|v| decision_values.binary_search(v).expect("present"))
            .collect();
        Self {
            condition_names,
            decision_name,
            columns,
            decision,
            coding,
            decision_values,
            decision_index,
        }
    }

    /// Builds the c1..c9 / risk table from quantized records.
    pub fn from_records(records: &[QuantizedRecord]) -> Self {
        let names = crate::quantize::CONDITION_NAMES
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut columns: Vec<Vec<Level>> =
            (0..9).map(|_| Vec::with_capacity(records.len())).collect();
        let mut decision = Vec::with_capacity(records.len());
        for r in records {
            for (col, v) in columns.iter_mut().zip(r.levels()) {
                col.push(v);
            }
            decision.push(r.risk.code());
        }
        Self::from_columns(
            names,
            "risk".into(),
            columns,
            decision,
            DecisionCoding::Risk,
        )
    }

    pub fn with_coding(mut self, coding: DecisionCoding) -> Self {
        self.coding = coding;
        self
    }

    /// Checks every condition level against an inclusive `(min, max)` domain.
    pub fn check_domains(&self, domains: &[(Level, Level)]) -> Result<()> {
        if domains.len() != self.columns.len() {
            return Err(Error::LengthMismatch {
                left: domains.len(),
                right: self.columns.len(),
            });
        }
        for ((name, col), &(lo, hi)) in self.condition_names.iter().zip(&self.columns).zip(domains)
        {
            if let Some(v) = col.iter().find(|v| !(lo..=hi).contains(*v)) {
                return Err(Error::field(name, format!("level {v} outside {lo}..={hi}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.decision.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decision.is_empty()
    }

    pub fn n_conditions(&self) -> usize {
        self.columns.len()
    }

    pub fn condition_names(&self) -> &[String] {
        &self.condition_names
    }

    pub fn decision_name(&self) -> &str {
        &self.decision_name
    }

    pub fn coding(&self) -> DecisionCoding {
        self.coding
    }

    /// Index of the decision attribute in attribute-index space.
    pub fn decision_attr(&self) -> usize {
        self.columns.len()
    }

    /// All condition attribute indices, in order.
    pub fn condition_attrs(&self) -> Vec<usize> {
        (0..self.columns.len()).collect()
    }

    pub fn attr_name(&self, attr: usize) -> &str {
        if attr == self.columns.len() {
            &self.decision_name
        } else {
            &self.condition_names[attr]
        }
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        if name == self.decision_name {
            return Ok(self.columns.len());
        }
        self.condition_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn resolve<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.index_of(n.as_ref())).collect()
    }

    /// Values of one attribute column (the decision column at `decision_attr()`).
    pub fn column(&self, attr: usize) -> Result<&[Level]> {
        match attr.cmp(&self.columns.len()) {
            std::cmp::Ordering::Less => Ok(&self.columns[attr]),
            std::cmp::Ordering::Equal => Ok(&self.decision),
            std::cmp::Ordering::Greater => Err(Error::UnknownAttribute(format!("#{attr}"))),
        }
    }

    pub fn value(&self, object: usize, attr: usize) -> Result<Level> {
        self.column(attr)?
            .get(object)
            .copied()
            .ok_or_else(|| Error::Domain(format!("object index {object} out of range")))
    }

    pub fn decision(&self) -> &[Level] {
        &self.decision
    }

    pub fn decision_values(&self) -> &[Level] {
        &self.decision_values
    }

    pub(crate) fn decision_index(&self) -> &[usize] {
        &self.decision_index
    }

    /// Condition values of one object.
    pub fn row(&self, object: usize) -> Vec<Level> {
        self.columns.iter().map(|c| c[object]).collect()
    }

    /// The table restricted to the given condition attributes plus the decision.
    pub fn restrict(&self, attrs: &[usize]) -> Result<Self> {
        let mut names = Vec::with_capacity(attrs.len());
        let mut columns = Vec::with_capacity(attrs.len());
        for &a in attrs {
            if a >= self.columns.len() {
                return Err(Error::UnknownAttribute(format!("#{a}")));
            }
            names.push(self.condition_names[a].clone());
            columns.push(self.columns[a].clone());
        }
        Ok(Self::from_columns(
            names,
            self.decision_name.clone(),
            columns,
            self.decision.clone(),
            self.coding,
        ))
    }

    /// Subset of objects, in the given order.
    pub fn select(&self, objects: &[usize]) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|c| objects.iter().map(|&o| c[o]).collect())
            .collect();
        let decision = objects.iter().map(|&o| self.decision[o]).collect();
        Self::from_columns(
            self.condition_names.clone(),
            self.decision_name.clone(),
            columns,
            decision,
            self.coding,
        )
    }

    /// Observed `(min, max)` level of a condition attribute.
    pub fn level_range(&self, attr: usize) -> Result<(Level, Level)> {
        let col = self.column(attr)?;
        let lo = col.iter().min().ok_or(Error::EmptyTable)?;
        let hi = col.iter().max().ok_or(Error::EmptyTable)?;
        Ok((*lo, *hi))
    }

    /// Reads a CSV decision table. Every column is a condition attribute except
    /// the decision column: `decision` when given, otherwise `risk` if present,
    /// otherwise the last column. Decision cells may be risk names or integers.
    pub fn read_csv<R: io::Read>(reader: R, decision: Option<&str>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if headers.len() < 2 {
            return Err(Error::Domain(
                "decision table needs at least two columns".into(),
            ));
        }
        let dec_col = match decision {
            Some(name) => headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::UnknownAttribute(name.to_string()))?,
            None => headers
                .iter()
                .position(|h| h == "risk")
                .unwrap_or(headers.len() - 1),
        };
        let cond_names: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != dec_col)
            .map(|(_, h)| h.clone())
            .collect();
        let mut columns = vec![Vec::new(); cond_names.len()];
        let mut decision_col = Vec::new();
        let mut coding: Option<DecisionCoding> = None;
        for rec in rdr.records() {
            let rec = rec?;
            let mut ci = 0;
            for (i, cell) in rec.iter().enumerate() {
                if i == dec_col {
                    let (code, c) = parse_decision(cell, &headers[i])?;
                    match coding {
                        None => coding = Some(c),
                        Some(prev) if prev != c => {
                            return Err(Error::field(
                                &headers[i],
                                "mixes risk names and numeric codes",
                            ))
                        }
                        _ => {}
                    }
                    decision_col.push(code);
                } else {
                    let v = cell.parse::<Level>().map_err(|_| {
                        Error::field(&headers[i], format!("`{cell}` is not a level code"))
                    })?;
                    columns[ci].push(v);
                    ci += 1;
                }
            }
        }
        let mut seen = HashSet::new();
        for h in &headers {
            if !seen.insert(h.as_str()) {
                return Err(Error::Domain(format!("duplicate attribute `{h}`")));
            }
        }
        Ok(Self::from_columns(
            cond_names,
            headers[dec_col].clone(),
            columns,
            decision_col,
            coding.unwrap_or(DecisionCoding::Numeric),
        ))
    }

    /// Writes the table with condition columns first and the decision last.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.condition_names.iter().map(String::as_str).collect();
        header.push(&self.decision_name);
        w.write_record(&header)?;
        for o in 0..self.len() {
            let mut rec: Vec<String> = self.columns.iter().map(|c| c[o].to_string()).collect();
            rec.push(self.coding.label(self.decision[o]));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

fn parse_decision(cell: &str, column: &str) -> Result<(Level, DecisionCoding)> {
    if let Ok(level) = cell.parse::<RiskLevel>() {
        return Ok((level.code(), DecisionCoding::Risk));
    }
    cell.parse::<Level>()
        .map(|v| (v, DecisionCoding::Numeric))
        .map_err(|_| {
            Error::field(
                column,
                format!("`{cell}` is neither a risk name nor a code"),
            )
        })
}

/// The quotient set U/IND(B).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    /// Blocks ordered by their smallest member; members ascending.
    pub blocks: Vec<Vec<usize>>,
    pub source_attrs: Vec<usize>,
}

impl Partition {
    pub fn block_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().map(Vec::len)
    }

    pub fn universe_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }
}

/// Assigns each object the id of its equivalence class under `attrs`. Ids are
/// dense and numbered by first appearance, so id order matches the order of
/// each block's smallest member.
pub(crate) fn block_ids(dt: &DecisionTable, attrs: &[usize]) -> Result<(Vec<u32>, usize)> {
    let n = dt.len();
    let cols = attrs
        .iter()
        .map(|&a| dt.column(a))
        .collect::<Result<Vec<_>>>()?;
    let mut ids = vec![0u32; n];
    if cols.is_empty() {
        return Ok((ids, usize::from(n > 0)));
    }
    // Pack each object's levels into one u64 when the radix product allows it.
    let mut span: u128 = 1;
    let radices: Vec<u64> = cols
        .iter()
        .map(|c| u64::from(c.iter().copied().max().unwrap_or(0)) + 1)
        .collect();
    for &r in &radices {
        span *= u128::from(r);
    }
    if span <= u128::from(u64::MAX) {
        let mut map: HashMap<u64, u32> = HashMap::new();
        for (o, id) in ids.iter_mut().enumerate() {
            let key = cols
                .iter()
                .zip(&radices)
                .fold(0u64, |k, (c, &r)| k * r + u64::from(c[o]));
            let next = map.len() as u32;
            *id = *map.entry(key).or_insert(next);
        }
        return Ok((ids, map.len()));
    }
    let mut count = usize::from(n > 0);
    for col in cols {
        let mut map: HashMap<(u32, Level), u32> = HashMap::with_capacity(count * 2);
        for (id, &v) in ids.iter_mut().zip(col) {
            let next = map.len() as u32;
            *id = *map.entry((*id, v)).or_insert(next);
        }
        count = map.len();
    }
    Ok((ids, count))
}

pub fn partition(dt: &DecisionTable, attrs: &[usize]) -> Result<Partition> {
    let (ids, count) = block_ids(dt, attrs)?;
    let mut blocks = vec![Vec::new(); count];
    for (o, &id) in ids.iter().enumerate() {
        blocks[id as usize].push(o);
    }
    let mut source_attrs = attrs.to_vec();
    source_attrs.sort_unstable();
    source_attrs.dedup();
    Ok(Partition {
        blocks,
        source_attrs,
    })
}

/// Name-based convenience over [`partition`].
pub fn partition_by_names<S: AsRef<str>>(dt: &DecisionTable, names: &[S]) -> Result<Partition> {
    partition(dt, &dt.resolve(names)?)
}

/// |cond ∩ dec| / |cond| as an exact ratio.
pub fn inclusion_degree(cond_block: &[usize], dec_block: &[usize]) -> Result<Degree> {
    if cond_block.is_empty() {
        return Err(Error::Domain("inclusion degree of an empty block".into()));
    }
    let dec: HashSet<usize> = dec_block.iter().copied().collect();
    let hits = cond_block.iter().filter(|o| dec.contains(o)).count();
    Ok(Degree::new(hits as u64, cond_block.len() as u64))
}

/// Block-by-decision count matrix for a condition attribute set.
#[derive(Clone, Debug)]
pub(crate) struct Contingency {
    pub sizes: Vec<u64>,
    /// `counts[block][k]` objects of block with decision `decision_values()[k]`.
    pub counts: Vec<Vec<u64>>,
    pub n: u64,
}

impl Contingency {
    pub fn build(dt: &DecisionTable, attrs: &[usize]) -> Result<Self> {
        let (ids, count) = block_ids(dt, attrs)?;
        let k = dt.decision_values().len();
        let mut sizes = vec![0u64; count];
        let mut counts = vec![vec![0u64; k]; count];
        for (&id, &d) in ids.iter().zip(dt.decision_index()) {
            sizes[id as usize] += 1;
            counts[id as usize][d] += 1;
        }
        Ok(Self {
            sizes,
            counts,
            n: dt.len() as u64,
        })
    }

    /// Decision-class totals.
    pub fn decision_totals(&self) -> Vec<u64> {
        let k = self.counts.first().map_or(0, Vec::len);
        let mut totals = vec![0u64; k];
        for row in &self.counts {
            for (t, c) in totals.iter_mut().zip(row) {
                *t += c;
            }
        }
        totals
    }
}

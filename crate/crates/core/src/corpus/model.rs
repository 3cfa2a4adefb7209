use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Dense index of a group inside a [`GroupRegistry`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct GroupIdx(pub u32);

impl GroupIdx {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for GroupIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// An expert group identified by its hierarchical path, e.g. `AC.BE.DB`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpertGroup {
    pub id: String,
    pub root: String,
    pub depth: usize,
}

impl ExpertGroup {
    pub fn parse(id: &str) -> Result<Self> {
        if id.is_empty() {
            return Err(Error::Validation("empty group id".into()));
        }
        if id.chars().any(char::is_whitespace) {
            return Err(Error::Validation(format!("group id `{id}` contains whitespace")));
        }
        let segments: Vec<&str> = id.split(['.', '\u{00B7}']).collect();
        if segments.iter().any(|s| s.is_empty()) {
            return Err(Error::Validation(format!("group id `{id}` has an empty path segment")));
        }
        Ok(ExpertGroup {
            id: id.to_string(),
            root: segments[0].to_string(),
            depth: segments.len(),
        })
    }
}

/// The set of known expert groups, in file order.
#[derive(Clone, Debug, Default)]
pub struct GroupRegistry {
    groups: Vec<ExpertGroup>,
    by_id: HashMap<String, GroupIdx>,
    roots: Vec<String>,
    root_of: Vec<usize>,
}

impl GroupRegistry {
    pub fn new<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut registry = GroupRegistry::default();
        for id in ids {
            registry.push(id.as_ref())?;
        }
        Ok(registry)
    }

    pub(crate) fn push(&mut self, id: &str) -> Result<GroupIdx> {
        if self.by_id.contains_key(id) {
            return Err(Error::Validation(format!("duplicate group id `{id}`")));
        }
        let group = ExpertGroup::parse(id)?;
        let idx = GroupIdx(self.groups.len() as u32);
        let root = match self.roots.iter().position(|r| *r == group.root) {
            Some(r) => r,
            None => {
                self.roots.push(group.root.clone());
                self.roots.len() - 1
            }
        };
        self.root_of.push(root);
        self.by_id.insert(group.id.clone(), idx);
        self.groups.push(group);
        Ok(idx)
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<GroupIdx> {
        self.by_id.get(id).copied()
    }

    pub fn lookup(&self, id: &str) -> Result<GroupIdx> {
        self.get(id).ok_or_else(|| Error::UnknownGroup(id.to_string()))
    }

    pub fn group(&self, idx: GroupIdx) -> &ExpertGroup {
        &self.groups[idx.index()]
    }

    pub fn id(&self, idx: GroupIdx) -> &str {
        &self.groups[idx.index()].id
    }

    pub fn groups(&self) -> impl Iterator<Item = (GroupIdx, &ExpertGroup)> {
        self.groups
            .iter()
            .enumerate()
            .map(|(i, g)| (GroupIdx(i as u32), g))
    }

    pub fn indices(&self) -> impl Iterator<Item = GroupIdx> {
        (0..self.groups.len() as u32).map(GroupIdx)
    }

    /// Distinct root ids in order of first appearance.
    pub fn roots(&self) -> &[String] {
        &self.roots
    }

    /// Position of the group's root within [`GroupRegistry::roots`].
    pub fn root_index(&self, idx: GroupIdx) -> usize {
        self.root_of[idx.index()]
    }

    pub fn root_of(&self, idx: GroupIdx) -> &str {
        &self.roots[self.root_of[idx.index()]]
    }

    pub fn root_position(&self, root: &str) -> Option<usize> {
        self.roots.iter().position(|r| r == root)
    }

    /// Groups whose root is `root`, in registry order.
    pub fn members_of(&self, root: &str) -> Vec<GroupIdx> {
        self.groups()
            .filter(|(_, g)| g.root == root)
            .map(|(i, _)| i)
            .collect()
    }
}

/// A ticket carrying its pre-extracted entity multiset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ticket {
    pub id: String,
    pub text: String,
    /// Entity names with occurrence counts, in listing order.
    pub entities: Vec<(String, u32)>,
    /// Token count: whitespace tokens of `text`, floored at the number of
    /// entity occurrences.
    pub length: usize,
}

impl Ticket {
    pub fn new(id: impl Into<String>, text: impl Into<String>, entities: Vec<(String, u32)>) -> Result<Self> {
        let id = id.into();
        let text = text.into();
        if id.is_empty() {
            return Err(Error::Validation("empty ticket id".into()));
        }
        if entities.is_empty() {
            return Err(Error::Validation(format!("ticket `{id}` has no entities")));
        }
        let mut seen = std::collections::HashSet::new();
        for (name, count) in &entities {
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(Error::Validation(format!(
                    "ticket `{id}` has an invalid entity name `{name}`"
                )));
            }
            if *count == 0 {
                return Err(Error::Validation(format!(
                    "ticket `{id}` entity `{name}` has zero count"
                )));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Validation(format!(
                    "ticket `{id}` lists entity `{name}` twice"
                )));
            }
        }
        let occurrences: usize = entities.iter().map(|(_, c)| *c as usize).sum();
        let length = text.split_whitespace().count().max(occurrences);
        Ok(Ticket {
            id,
            text,
            entities,
            length,
        })
    }

    pub fn entity_occurrences(&self) -> usize {
        self.entities.iter().map(|(_, c)| *c as usize).sum()
    }

    /// The ticket's entities as a token sequence.
    ///
    /// Text tokens that name one of the ticket's entities are kept in text
    /// order. When the text mentions none of them, the entity list is
    /// expanded by count in listing order.
    pub fn entity_sequence(&self) -> Vec<&str> {
        let names: std::collections::HashSet<&str> =
            self.entities.iter().map(|(e, _)| e.as_str()).collect();
        let from_text: Vec<&str> = self
            .text
            .split_whitespace()
            .filter(|t| names.contains(t))
            .collect();
        if !from_text.is_empty() {
            return from_text;
        }
        self.entities
            .iter()
            .flat_map(|(e, c)| std::iter::repeat_n(e.as_str(), *c as usize))
            .collect()
    }
}

/// The ordered list of groups that handled a ticket; the last one resolved it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoutingRecord {
    pub ticket_id: String,
    pub sequence: Vec<GroupIdx>,
}

impl RoutingRecord {
    /// Builds a record, collapsing consecutive repeats.
    pub fn new(ticket_id: impl Into<String>, sequence: Vec<GroupIdx>) -> Result<Self> {
        let ticket_id = ticket_id.into();
        let mut collapsed = sequence;
        collapsed.dedup();
        if collapsed.is_empty() {
            return Err(Error::Validation(format!(
                "routing record for `{ticket_id}` has an empty sequence"
            )));
        }
        let resolver = *collapsed.last().unwrap();
        if collapsed[..collapsed.len() - 1].contains(&resolver) {
            return Err(Error::Validation(format!(
                "routing record for `{ticket_id}` visits its resolver before the last step"
            )));
        }
        Ok(RoutingRecord {
            ticket_id,
            sequence: collapsed,
        })
    }

    pub fn resolver(&self) -> GroupIdx {
        *self.sequence.last().expect("non-empty by construction")
    }

    pub fn initial(&self) -> GroupIdx {
        self.sequence[0]
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

/// Tickets, their routing records and the group registry.
#[derive(Clone, Debug)]
pub struct Corpus {
    tickets: Vec<Ticket>,
    records: Vec<RoutingRecord>,
    registry: GroupRegistry,
    ticket_pos: HashMap<String, usize>,
    record_of: Vec<Option<usize>>,
}

impl Corpus {
    pub fn new(tickets: Vec<Ticket>, records: Vec<RoutingRecord>, registry: GroupRegistry) -> Result<Self> {
        let mut ticket_pos = HashMap::with_capacity(tickets.len());
        for (i, t) in tickets.iter().enumerate() {
            if ticket_pos.insert(t.id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate ticket id `{}`", t.id)));
            }
        }
        let mut record_of = vec![None; tickets.len()];
        for (r, rec) in records.iter().enumerate() {
            let pos = *ticket_pos.get(&rec.ticket_id).ok_or_else(|| {
                Error::Validation(format!(
                    "routing record references unknown ticket `{}`",
                    rec.ticket_id
                ))
            })?;
            if record_of[pos].is_some() {
                return Err(Error::Validation(format!(
                    "ticket `{}` has more than one routing record",
                    rec.ticket_id
                )));
            }
            if let Some(g) = rec.sequence.iter().find(|g| g.index() >= registry.len()) {
                return Err(Error::UnknownGroup(g.to_string()));
            }
            record_of[pos] = Some(r);
        }
        Ok(Corpus {
            tickets,
            records,
            registry,
            ticket_pos,
            record_of,
        })
    }

    pub fn tickets(&self) -> &[Ticket] {
        &self.tickets
    }

    pub fn records(&self) -> &[RoutingRecord] {
        &self.records
    }

    pub fn registry(&self) -> &GroupRegistry {
        &self.registry
    }

    pub fn ticket(&self, id: &str) -> Option<&Ticket> {
        self.ticket_pos.get(id).map(|&i| &self.tickets[i])
    }

    pub fn record_for(&self, ticket_id: &str) -> Option<&RoutingRecord> {
        let pos = *self.ticket_pos.get(ticket_id)?;
        self.record_of[pos].map(|r| &self.records[r])
    }

    /// Routing records paired with their tickets.
    pub fn routed(&self) -> impl Iterator<Item = (&Ticket, &RoutingRecord)> {
        self.records
            .iter()
            .map(move |r| (&self.tickets[self.ticket_pos[&r.ticket_id]], r))
    }

    pub fn is_empty(&self) -> bool {
        self.tickets.is_empty()
    }

    /// A corpus restricted to the given ticket ids (records follow their tickets).
    pub fn subset<'a, I>(&self, ids: I) -> Result<Corpus>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut tickets = Vec::new();
        let mut records = Vec::new();
        for id in ids {
            let pos = *self
                .ticket_pos
                .get(id)
                .ok_or_else(|| Error::Validation(format!("unknown ticket `{id}`")))?;
            tickets.push(self.tickets[pos].clone());
            if let Some(r) = self.record_of[pos] {
                records.push(self.records[r].clone());
            }
        }
        Corpus::new(tickets, records, self.registry.clone())
    }
}

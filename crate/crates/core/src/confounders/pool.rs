//! Dataset-wide question pool for the random-question and irrelevant-context
//! generators.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::corpus::Conversation;
use crate::entity::{EntityCatalog, EntityMention, EntityType};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolQuestion {
    pub text: String,
    /// Index into the pool's conversation groups.
    pub conversation: usize,
    pub mentions: Vec<EntityMention>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuestionPool {
    questions: Vec<PoolQuestion>,
    groups: Vec<(String, Vec<usize>)>,
    group_of: BTreeMap<String, usize>,
    by_type: BTreeMap<EntityType, Vec<(usize, usize)>>,
}

/// Rejection-sampling attempts before falling back to an explicit scan.
const ATTEMPTS: usize = 32;

impl QuestionPool {
    /// Collects the rewritten question of every turn, in corpus order. With a
    /// catalog, each question's mentions are indexed by entity type.
    pub fn build(conversations: &[Conversation], catalog: Option<&EntityCatalog>) -> Self {
        let mut pool = QuestionPool::default();
        for conv in conversations {
            for turn in &conv.turns {
                pool.push(&conv.conversation_id, &turn.question_rewritten, catalog);
            }
        }
        pool
    }

    pub fn push(&mut self, conversation_id: &str, text: &str, catalog: Option<&EntityCatalog>) {
        let group = match self.group_of.get(conversation_id) {
            Some(&g) => g,
            None => {
                self.groups.push((conversation_id.into(), Vec::new()));
                self.group_of.insert(conversation_id.into(), self.groups.len() - 1);
                self.groups.len() - 1
            }
        };
        let qi = self.questions.len();
        let mentions = catalog.map(|c| c.find_entities(text)).unwrap_or_default();
        for (mi, m) in mentions.iter().enumerate() {
            self.by_type.entry(m.entity_type).or_default().push((qi, mi));
        }
        self.questions.push(PoolQuestion { text: text.into(), conversation: group, mentions });
        self.groups[group].1.push(qi);
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    pub fn question(&self, i: usize) -> &PoolQuestion {
        &self.questions[i]
    }

    pub fn conversation_id(&self, group: usize) -> &str {
        &self.groups[group].0
    }

    fn group(&self, conversation_id: &str) -> Option<usize> {
        self.group_of.get(conversation_id).copied()
    }

    /// Uniformly picks a `(question, mention)` pair of the given type from a
    /// conversation other than `exclude_conversation`.
    pub fn pick_same_type<R: Rng + ?Sized>(
        &self,
        entity_type: EntityType,
        exclude_conversation: &str,
        rng: &mut R,
    ) -> Option<(usize, usize)> {
        let list = self.by_type.get(&entity_type)?;
        let own = self.group(exclude_conversation);
        let ok = |&(q, _): &(usize, usize)| Some(self.questions[q].conversation) != own;
        pick(list, ok, rng).copied()
    }

    /// Up to `k` question indices from conversations other than
    /// `exclude_conversation`, one per conversation while enough conversations
    /// exist, then filling from the chosen conversations.
    pub fn pick_random<R: Rng + ?Sized>(&self, exclude_conversation: &str, k: usize, rng: &mut R) -> Vec<usize> {
        if k == 0 {
            return Vec::new();
        }
        let own = self.group(exclude_conversation);
        let others: Vec<usize> = if self.groups.len() - usize::from(own.is_some()) <= k {
            (0..self.groups.len()).filter(|&g| Some(g) != own).collect()
        } else {
            let mut chosen: Vec<usize> = Vec::with_capacity(k);
            let mut tries = 0;
            while chosen.len() < k && tries < ATTEMPTS * k {
                tries += 1;
                let g = rng.gen_range(0..self.groups.len());
                if Some(g) != own && !chosen.contains(&g) {
                    chosen.push(g);
                }
            }
            while chosen.len() < k {
                let rest: Vec<usize> =
                    (0..self.groups.len()).filter(|&g| Some(g) != own && !chosen.contains(&g)).collect();
                chosen.push(rest[rng.gen_range(0..rest.len())]);
            }
            chosen
        };
        let mut picked: Vec<usize> =
            others.iter().map(|&g| &self.groups[g].1).map(|qs| qs[rng.gen_range(0..qs.len())]).collect();
        if picked.len() < k {
            let mut rest: Vec<usize> =
                others.iter().flat_map(|&g| self.groups[g].1.iter().copied()).filter(|q| !picked.contains(q)).collect();
            while picked.len() < k && !rest.is_empty() {
                picked.push(rest.remove(rng.gen_range(0..rest.len())));
            }
        }
        picked.truncate(k);
        picked
    }
}

fn pick<'a, T, R, F>(list: &'a [T], ok: F, rng: &mut R) -> Option<&'a T>
where
    R: Rng + ?Sized,
    F: Fn(&T) -> bool,
{
    if list.is_empty() {
        return None;
    }
    for _ in 0..ATTEMPTS {
        let item = &list[rng.gen_range(0..list.len())];
        if ok(item) {
            return Some(item);
        }
    }
    let eligible: Vec<&T> = list.iter().filter(|x| ok(x)).collect();
    if eligible.is_empty() {
        None
    } else {
        Some(eligible[rng.gen_range(0..eligible.len())])
    }
}

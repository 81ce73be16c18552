//! Interned symbols and the working symbol sequence.

use rustc_hash::FxHashMap;

/// Index of a symbol in a [`SymbolTable`].
pub type SymbolId = u32;

/// Bidirectional map between symbol strings and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    strings: Vec<String>,
    ids: FxHashMap<String, SymbolId>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `s`, adding it if absent.
    pub fn intern(&mut self, s: &str) -> SymbolId {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = SymbolId::try_from(self.strings.len()).expect("symbol table overflow");
        self.strings.push(s.to_owned());
        self.ids.insert(s.to_owned(), id);
        id
    }

    pub fn get(&self, s: &str) -> Option<SymbolId> {
        self.ids.get(s).copied()
    }

    /// # Panics
    /// If `id` was not produced by this table.
    pub fn resolve(&self, id: SymbolId) -> &str {
        &self.strings[id as usize]
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }
}

/// An ordered list of symbols together with the table that names them.
#[derive(Debug, Clone, Default)]
pub struct SymbolSequence {
    pub table: SymbolTable,
    pub symbols: Vec<SymbolId>,
}

impl SymbolSequence {
    /// One symbol per character of `text`.
    pub fn from_chars(text: &str) -> Self {
        let mut table = SymbolTable::new();
        let mut buf = [0u8; 4];
        let symbols = text
            .chars()
            .map(|c| table.intern(c.encode_utf8(&mut buf)))
            .collect();
        Self { table, symbols }
    }

    /// Build a sequence from explicit symbol strings, e.g. `["a", "b", "a"]`.
    pub fn from_symbols<S: AsRef<str>>(items: &[S]) -> Self {
        let mut table = SymbolTable::new();
        let symbols = items.iter().map(|s| table.intern(s.as_ref())).collect();
        Self { table, symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn strings(&self) -> impl Iterator<Item = &str> + '_ {
        self.symbols.iter().map(|&id| self.table.resolve(id))
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.strings().map(str::to_owned).collect()
    }

    /// Concatenation of every symbol's string.
    pub fn decode(&self) -> String {
        self.strings().collect()
    }

    /// Number of distinct symbols currently present.
    pub fn distinct(&self) -> usize {
        let mut seen = vec![false; self.table.len()];
        let mut n = 0;
        for &s in &self.symbols {
            if !std::mem::replace(&mut seen[s as usize], true) {
                n += 1;
            }
        }
        n
    }
}

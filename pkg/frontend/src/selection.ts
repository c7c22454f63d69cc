// Annotation state for one sentence pane: the current selection, the
// proposal fetched for it, and the confirmations the annotator has
// given. The one hard rule lives in blockers(): a proposal cannot turn
// into an edit while any label the service marked unreliable is neither
// confirmed nor replaced. Service failures set a banner message and
// touch nothing else, so a stale-version conflict never costs the
// annotator their selection.

import {
  Edit,
  IncrementEnvelope,
  IncrementProposal,
  Sentence,
  SentenceEnvelope,
} from "./types.js"

interface PendingProposal {
  proposal: IncrementProposal
  confirmed: Set<number>
  overrides: Map<number, string>
  categoryConfirmed: boolean
  categoryOverride: string | null
}

export class AnnotationState {
  sentence: Sentence | null = null
  version = 0
  selected: number[] = []
  pending: PendingProposal | null = null
  error: string | null = null

  displayedIds(): Set<number> {
    const ids = new Set<number>()
    if (this.sentence !== null) {
      for (const token of this.sentence.tokens) ids.add(token.position)
      for (const node of this.sentence.nodes) ids.add(node.id)
    }
    return ids
  }

  // Fresh or reloaded sentence. Selection and proposal survive a reload
  // as long as everything they refer to is still displayed.
  setSentence(envelope: SentenceEnvelope): void {
    this.sentence = envelope.sentence
    this.version = envelope.version
    const displayed = this.displayedIds()
    this.selected = this.selected.filter(id => displayed.has(id))
    if (this.pending !== null && this.pending.proposal.selected.some(id => !displayed.has(id))) {
      this.pending = null
    }
  }

  // The server accepted an edit batch; its response is the new truth.
  applied(envelope: SentenceEnvelope): void {
    this.sentence = envelope.sentence
    this.version = envelope.version
    this.selected = []
    this.pending = null
    this.error = null
  }

  toggle(id: number): void {
    if (!this.displayedIds().has(id)) {
      throw new Error(`node ${id} is not displayed`)
    }
    this.pending = null
    this.error = null
    const at = this.selected.indexOf(id)
    if (at >= 0) this.selected.splice(at, 1)
    else this.selected.push(id)
  }

  selectTokenRange(from: number, to: number): void {
    const count = this.sentence === null ? 0 : this.sentence.tokens.length
    const lo = Math.min(from, to)
    const hi = Math.max(from, to)
    if (lo < 0 || hi >= count) {
      throw new Error(`token range ${from}..${to} is out of bounds`)
    }
    this.pending = null
    this.error = null
    this.selected = []
    for (let position = lo; position <= hi; position++) this.selected.push(position)
  }

  setProposal(envelope: IncrementEnvelope): void {
    const displayed = this.displayedIds()
    const proposal = envelope.proposal
    for (const id of proposal.selected) {
      if (!displayed.has(id)) {
        throw new Error(`proposal refers to ${id} which is not displayed`)
      }
    }
    const ours = new Set(this.selected)
    if (proposal.selected.length !== ours.size || proposal.selected.some(id => !ours.has(id))) {
      throw new Error("proposal does not match the selection")
    }
    this.pending = {
      proposal,
      confirmed: new Set(),
      overrides: new Map(),
      categoryConfirmed: false,
      categoryOverride: null,
    }
    this.error = null
  }

  reject(): void {
    this.pending = null
    this.error = null
  }

  // 409 and other service errors: banner only, nothing else moves.
  conflict(detail: string): void {
    this.error = detail
  }

  // Node ids whose proposed label came back unreliable.
  highlight(): number[] {
    if (this.pending === null || this.pending.proposal.labels === null) return []
    return this.pending.proposal.labels.filter(l => !l.reliable).map(l => l.node)
  }

  categoryUnreliable(): boolean {
    return this.pending !== null && this.pending.proposal.category_reliable === false
  }

  confirmLabel(node: number): void {
    if (this.pending === null) {
      throw new Error("no pending proposal")
    }
    if (!this.highlight().includes(node)) {
      throw new Error(`node ${node} has no unreliable label to confirm`)
    }
    this.pending.confirmed.add(node)
  }

  overrideLabel(node: number, label: string): void {
    if (this.pending === null) {
      throw new Error("no pending proposal")
    }
    if (!this.pending.proposal.selected.includes(node)) {
      throw new Error(`node ${node} is not part of the proposal`)
    }
    this.pending.overrides.set(node, label)
  }

  confirmCategory(): void {
    if (this.pending === null) {
      throw new Error("no pending proposal")
    }
    this.pending.categoryConfirmed = true
  }

  overrideCategory(category: string): void {
    if (this.pending === null) {
      throw new Error("no pending proposal")
    }
    this.pending.categoryOverride = category
  }

  resolvedCategory(): string | null {
    if (this.pending === null) return null
    return this.pending.categoryOverride ?? this.pending.proposal.category
  }

  // Everything still standing between the pending proposal and an edit.
  blockers(): string[] {
    const pending = this.pending
    if (pending === null) return ["no pending proposal"]
    const out: string[] = []
    if (this.resolvedCategory() === null) {
      out.push("no category")
    } else if (this.categoryUnreliable() && !pending.categoryConfirmed && pending.categoryOverride === null) {
      out.push("category is unconfirmed")
    }
    const proposed = new Map<number, { label: string; reliable: boolean }>()
    for (const entry of pending.proposal.labels ?? []) {
      proposed.set(entry.node, entry)
    }
    for (const node of pending.proposal.selected) {
      if (pending.overrides.has(node)) continue
      const entry = proposed.get(node)
      if (entry === undefined) {
        out.push(`node ${node} has no label`)
      } else if (!entry.reliable && !pending.confirmed.has(node)) {
        out.push(`label for node ${node} is unconfirmed`)
      }
    }
    return out
  }

  canAccept(): boolean {
    return this.blockers().length === 0
  }

  // Labels the keyboard can cycle an override through: everything in
  // use in the displayed sentence plus everything proposed. The wire
  // protocol carries no label inventory, so the pool is induced.
  labelPool(): string[] {
    const pool = new Set<string>()
    if (this.sentence !== null) {
      for (const token of this.sentence.tokens) {
        if (token.parent !== null) pool.add(token.label)
      }
      for (const node of this.sentence.nodes) {
        if (node.parent !== null) pool.add(node.label)
      }
    }
    for (const entry of this.pending?.proposal.labels ?? []) {
      pool.add(entry.label)
    }
    return [...pool].sort()
  }

  // One keyboard step through the pool for a proposed node's label.
  cycleLabel(node: number, step: 1 | -1): void {
    if (this.pending === null) {
      throw new Error("no pending proposal")
    }
    const pool = this.labelPool()
    if (pool.length === 0) return
    const proposed = this.pending.proposal.labels?.find(l => l.node === node)
    const current = this.pending.overrides.get(node) ?? proposed?.label
    const at = current === undefined ? -1 : pool.indexOf(current)
    this.overrideLabel(node, pool[(at + step + pool.length) % pool.length])
  }

  // The guard: refuses while blockers() is nonempty, so an edit with an
  // unconfirmed unreliable label cannot be produced at all.
  acceptEdit(): Edit {
    const blockers = this.blockers()
    if (blockers.length > 0) {
      throw new Error(`cannot accept: ${blockers.join(", ")}`)
    }
    const pending = this.pending!
    const labels: Record<string, string> = {}
    const proposed = new Map<number, string>()
    for (const entry of pending.proposal.labels ?? []) {
      proposed.set(entry.node, entry.label)
    }
    for (const node of pending.proposal.selected) {
      labels[String(node)] = pending.overrides.get(node) ?? proposed.get(node)!
    }
    return {
      kind: "group",
      selected: [...pending.proposal.selected],
      category: this.resolvedCategory()!,
      labels,
    }
  }
}

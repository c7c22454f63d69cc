// JSON shapes of the annotation service. These mirror the server's
// responses field for field; the client never invents structure of its
// own, it renders and edits exactly what the wire carries.

export interface WireToken {
  position: number
  form: string
  pos: string
  reliable: boolean
  parent: number | null
  label: string
}

export interface WireNode {
  id: number
  category: string
  parent: number | null
  label: string
}

export interface Sentence {
  id: string
  comment: string | null
  tokens: WireToken[]
  nodes: WireNode[]
  // nonterminal ids whose yield falls into more than one block,
  // as computed by the server
  discontinuous: number[]
}

export interface Meta {
  corpus: string | null
  models: { pos: string | null; labeler: string | null; chunker: string | null }
  format_version: number
  container_version: number
}

export interface SentenceEnvelope {
  sentence: Sentence
  version: number
  meta: Meta
}

export interface SessionInfo {
  session: string
  annotator: string
  tagset: string
  sentences: string[]
  versions: Record<string, number>
  meta: Meta
}

export interface ProposedLabel {
  node: number
  label: string
  reliable: boolean
}

export interface ChunkProposal {
  structure: Sentence
  reliable: boolean[]
}

export interface IncrementProposal {
  selected: number[]
  child_tags: string[]
  category: string | null
  category_reliable: boolean | null
  labels: ProposedLabel[] | null
  chunk: ChunkProposal | null
}

export interface IncrementEnvelope {
  proposal: IncrementProposal
  version: number
  meta: Meta
}

export type Edit =
  | { kind: "group"; selected: number[]; category: string; labels: Record<string, string> }
  | { kind: "relabel"; node: number; category?: string; label?: string }
  | { kind: "dissolve"; node: number }

export interface Inconsistency {
  kind: string
  positions: number[]
  left: number | null
  right: number | null
  detail: string
}

export interface AgreementMetrics {
  precision: number
  recall: number
  f1: number
  matched: number
  left_total: number
  right_total: number
  label_agreements: number
  label_comparisons: number
}

export interface SentenceComparison {
  sentence: string
  inconsistencies: Inconsistency[]
  metrics: AgreementMetrics | null
}

export interface ComparisonReport {
  left: string
  right: string
  sentences: SentenceComparison[]
  only_left: string[]
  only_right: string[]
  meta: Meta
}

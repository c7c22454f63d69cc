// View model for side-by-side comparison. The server's report is
// authoritative: every reported inconsistency becomes exactly one item
// here, in report order, and nothing is merged, filtered, or added.
// Each item carries one highlight target per side; a side that lacks
// the implicated node gets a gap marker over the same token positions.

import { AgreementMetrics, ComparisonReport } from "./types.js"

export interface HighlightTarget {
  side: "left" | "right"
  node: number | null
  positions: number[]
  gap: boolean
}

export interface ComparisonItem {
  sentence: string
  index: number
  kind: string
  detail: string
  positions: number[]
  targets: [HighlightTarget, HighlightTarget]
}

export interface SentenceView {
  sentence: string
  items: ComparisonItem[]
  metrics: AgreementMetrics | null
}

export interface ComparisonView {
  left: string
  right: string
  sentences: SentenceView[]
  onlyLeft: string[]
  onlyRight: string[]
  total: number
  empty: boolean
}

export function buildComparisonView(report: ComparisonReport): ComparisonView {
  let total = 0
  const sentences: SentenceView[] = report.sentences.map(entry => {
    const items: ComparisonItem[] = entry.inconsistencies.map((inc, index) => {
      total++
      const target = (side: "left" | "right", node: number | null): HighlightTarget => ({
        side,
        node,
        positions: [...inc.positions],
        // only node-missing leaves a hole on one side; a token mismatch
        // has no node on either side and highlights positions instead
        gap: node === null && inc.kind === "node-missing",
      })
      return {
        sentence: entry.sentence,
        index,
        kind: inc.kind,
        detail: inc.detail,
        positions: [...inc.positions],
        targets: [target("left", inc.left), target("right", inc.right)],
      }
    })
    return { sentence: entry.sentence, items, metrics: entry.metrics }
  })
  return {
    left: report.left,
    right: report.right,
    sentences,
    onlyLeft: [...report.only_left],
    onlyRight: [...report.only_right],
    total,
    empty: total === 0,
  }
}

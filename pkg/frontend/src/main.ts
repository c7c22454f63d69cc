// Wiring: one ServiceClient, one AnnotationState, and a single promise
// chain through which every user action runs, so state transitions are
// serialized no matter how fast the annotator clicks or types.

import { ServiceClient, ServiceError } from "./api.js"
import { buildComparisonView, ComparisonItem, ComparisonView } from "./compare.js"
import { layoutTree } from "./layout.js"
import { flash, renderTree } from "./render.js"
import { AnnotationState } from "./selection.js"
import { SessionInfo } from "./types.js"

const $ = <T extends HTMLElement>(id: string): T => document.getElementById(id) as T

function el(tag: string, attrs: Record<string, string> = {}, ...children: (string | Node)[]): HTMLElement {
  const node = document.createElement(tag)
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value)
  node.append(...children)
  return node
}

let chain: Promise<void> = Promise.resolve()
function enqueue(action: () => void | Promise<void>): void {
  chain = chain
    .then(action)
    .catch(err => banner(err instanceof Error ? err.message : String(err)))
}

function banner(message: string | null): void {
  const box = $("banner")
  box.hidden = message === null
  box.textContent = message ?? ""
}

let client: ServiceClient | null = null
let session: SessionInfo | null = null
let currentSentence: string | null = null
let cursor = 0
let anchor: number | null = null
const state = new AnnotationState()

// -- tree pane ------------------------------------------------------------

function redraw(): void {
  banner(state.error)
  const pane = $("tree-pane")
  pane.replaceChildren()
  if (state.sentence === null) {
    pane.append(el("p", { class: "hint" }, "Open a session and pick a sentence."))
    renderProposal()
    return
  }
  const layout = layoutTree(state.sentence)
  const svg = renderTree(layout, {
    selected: new Set(state.selected),
    unreliablePos: new Set(state.sentence.tokens.filter(t => !t.reliable).map(t => t.position)),
    discontinuous: new Set(state.sentence.discontinuous),
    onSelect: id => enqueue(() => {
      state.toggle(id)
      redraw()
    }),
  })
  svg.querySelector(`.token-form[data-id="${cursor}"]`)?.classList.add("cursor")
  pane.append(svg)
  if (state.sentence.comment !== null) {
    pane.append(el("p", { class: "hint" }, state.sentence.comment))
  }
  pane.append(el("p", { class: "hint" },
    "arrows move, shift+arrows select a range, space toggles, enter asks for a proposal, escape clears"))
  renderProposal()
  refreshSentenceList()
}

function refreshSentenceList(): void {
  const list = $("sentence-list")
  list.replaceChildren()
  if (session === null) return
  for (const id of session.sentences) {
    const button = el("button", id === currentSentence ? { class: "current" } : {}, id)
    button.addEventListener("click", () => enqueue(() => loadSentence(id)))
    list.append(button)
  }
}

async function loadSentence(id: string): Promise<void> {
  if (client === null || session === null) return
  const envelope = await client.sentence(session.session, id)
  currentSentence = id
  cursor = 0
  anchor = null
  state.setSentence(envelope)
  state.error = null
  redraw()
}

// -- proposal pane --------------------------------------------------------

function renderProposal(): void {
  const pane = $("proposal-pane")
  pane.replaceChildren()
  const pending = state.pending
  if (pending === null) {
    pane.hidden = true
    return
  }
  pane.hidden = false
  pane.append(el("h3", {}, "Proposed increment"))

  const categoryRow = el("div", { class: "row" }, "category: ",
    el("b", {}, state.resolvedCategory() ?? "none"))
  if (state.categoryUnreliable()) {
    categoryRow.append(el("span", { class: "badge unreliable" }, "unreliable"))
    if (!pending.categoryConfirmed && pending.categoryOverride === null) {
      const confirm = el("button", {}, "confirm")
      confirm.addEventListener("click", () => enqueue(() => {
        state.confirmCategory()
        redraw()
      }))
      categoryRow.append(confirm)
    } else {
      categoryRow.append(el("span", { class: "badge" }, "confirmed"))
    }
  }
  const categoryInput = el("input", { placeholder: "category" }) as HTMLInputElement
  const categorySet = el("button", {}, "set")
  categorySet.addEventListener("click", () => enqueue(() => {
    if (categoryInput.value.trim() !== "") state.overrideCategory(categoryInput.value.trim())
    redraw()
  }))
  categoryRow.append(categoryInput, categorySet)
  pane.append(categoryRow)

  const labels = new Map((pending.proposal.labels ?? []).map(l => [l.node, l]))
  for (const node of pending.proposal.selected) {
    const proposed = labels.get(node)
    const override = pending.overrides.get(node)
    const row = el("div", { class: "row", tabindex: "0", "data-node": String(node) }, `${node}: `,
      el("b", {}, override ?? proposed?.label ?? "?"))
    row.addEventListener("keydown", event => {
      if (event.key === "ArrowUp" || event.key === "ArrowDown") {
        event.preventDefault()
        enqueue(() => {
          state.cycleLabel(node, event.key === "ArrowDown" ? 1 : -1)
          redraw()
          refocusLabelRow(node)
        })
      } else if (event.key === "Enter" && proposed !== undefined && !proposed.reliable
          && override === undefined && !pending.confirmed.has(node)) {
        event.preventDefault()
        enqueue(() => {
          state.confirmLabel(node)
          redraw()
          refocusLabelRow(node)
        })
      }
    })
    if (proposed !== undefined && !proposed.reliable && override === undefined) {
      row.append(el("span", { class: "badge unreliable" }, "unreliable"))
      if (pending.confirmed.has(node)) {
        row.append(el("span", { class: "badge" }, "confirmed"))
      } else {
        const confirm = el("button", {}, "confirm")
        confirm.addEventListener("click", () => enqueue(() => {
          state.confirmLabel(node)
          redraw()
        }))
        row.append(confirm)
      }
    }
    const input = el("input", { placeholder: "label" }) as HTMLInputElement
    const set = el("button", {}, "set")
    set.addEventListener("click", () => enqueue(() => {
      if (input.value.trim() !== "") state.overrideLabel(node, input.value.trim())
      redraw()
    }))
    row.append(input, set)
    pane.append(row)
  }

  if (pending.proposal.chunk !== null) {
    pane.append(el("p", { class: "hint" }, "proposed internal structure:"))
    const preview = el("div", {})
    preview.append(renderTree(layoutTree(pending.proposal.chunk.structure)))
    pane.append(preview)
  }

  pane.append(el("p", { class: "hint" },
    "focus a label row: arrows cycle the label, enter confirms"))

  const accept = el("button", {}, "Accept") as HTMLButtonElement
  accept.disabled = !state.canAccept()
  if (accept.disabled) accept.title = state.blockers().join(", ")
  accept.addEventListener("click", () => enqueue(acceptProposal))
  const reject = el("button", {}, "Reject")
  reject.addEventListener("click", () => enqueue(() => {
    state.reject()
    redraw()
  }))
  pane.append(el("div", { class: "row" }, accept, reject))
}

// Redrawing replaces the pane, so a cycling keystroke puts focus back
// on the row it was operating on.
function refocusLabelRow(node: number): void {
  const row = $("proposal-pane").querySelector(`[data-node="${node}"]`)
  if (row instanceof HTMLElement) row.focus()
}

async function submitIncrement(): Promise<void> {
  if (client === null || session === null || currentSentence === null) return
  if (state.selected.length === 0) return
  try {
    const envelope = await client.proposeIncrement(session.session, currentSentence, state.selected)
    state.setProposal(envelope)
  } catch (err) {
    // keep the selection, surface the refusal inline
    if (err instanceof ServiceError) state.conflict(err.message)
    else throw err
  }
  redraw()
}

async function acceptProposal(): Promise<void> {
  if (client === null || session === null || currentSentence === null) return
  const edit = state.acceptEdit()
  const outcome = await client.applyEdits(session.session, currentSentence, state.version, [edit])
  if (outcome.ok) {
    state.applied(outcome.envelope)
  } else {
    // stale version or rejected edit: banner only, selection and
    // proposal stay for the annotator to reload or adjust
    state.conflict(outcome.detail)
  }
  redraw()
}

// -- keyboard -------------------------------------------------------------

$("tree-pane").addEventListener("keydown", event => {
  if (state.sentence === null) return
  const count = state.sentence.tokens.length
  const key = event.key
  if (key === "ArrowLeft" || key === "ArrowRight") {
    event.preventDefault()
    const next = Math.min(count - 1, Math.max(0, cursor + (key === "ArrowRight" ? 1 : -1)))
    enqueue(() => {
      if (event.shiftKey) {
        if (anchor === null) anchor = cursor
        cursor = next
        state.selectTokenRange(anchor, cursor)
      } else {
        anchor = null
        cursor = next
      }
      redraw()
    })
  } else if (key === " ") {
    event.preventDefault()
    enqueue(() => {
      anchor = null
      state.toggle(cursor)
      redraw()
    })
  } else if (key === "Enter") {
    event.preventDefault()
    enqueue(submitIncrement)
  } else if (key === "Escape") {
    event.preventDefault()
    enqueue(() => {
      anchor = null
      state.reject()
      state.selected = []
      redraw()
    })
  }
})

// -- session --------------------------------------------------------------

$("connect-form").addEventListener("submit", event => {
  event.preventDefault()
  enqueue(async () => {
    const base = ($("base-url") as HTMLInputElement).value.replace(/\/+$/, "")
    client = new ServiceClient(base)
    const annotator = ($("annotator") as HTMLInputElement).value.trim() || "anonymous"
    session = await client.openSession(($("corpus") as HTMLInputElement).value.trim(), annotator)
    banner(null)
    refreshSentenceList()
    if (session.sentences.length > 0) await loadSentence(session.sentences[0])
  })
})

// -- comparison -----------------------------------------------------------

function renderComparison(view: ComparisonView): void {
  const pane = $("comparison-pane")
  pane.replaceChildren()
  pane.hidden = false
  pane.append(el("h3", {}, `${view.left} vs ${view.right}`))
  if (view.empty) {
    pane.append(el("p", {}, "no inconsistencies"))
  }
  for (const sentence of view.sentences) {
    const details = el("details", {}) as HTMLDetailsElement
    const metrics = sentence.metrics === null
      ? "metrics unavailable"
      : `labeled f1 ${sentence.metrics.f1.toFixed(4)}`
    details.append(el("summary", {},
      `sentence ${sentence.sentence}: ${sentence.items.length} inconsistencies `,
      el("span", { class: "metrics" }, metrics)))
    const trees = el("div", { class: "side-by-side" })
    const sides = { left: el("div", {}), right: el("div", {}) }
    trees.append(sides.left, sides.right)
    let loaded = false
    details.addEventListener("toggle", () => {
      if (!details.open || loaded) return
      loaded = true
      enqueue(async () => {
        if (client === null) return
        for (const side of ["left", "right"] as const) {
          const opened = await client.openSession(side === "left" ? view.left : view.right, "review")
          const envelope = await client.sentence(opened.session, sentence.sentence)
          sides[side].append(renderTree(layoutTree(envelope.sentence), {
            discontinuous: new Set(envelope.sentence.discontinuous),
          }))
        }
      })
    })
    for (const item of sentence.items) {
      details.append(renderComparisonItem(item, sides))
    }
    details.append(trees)
    pane.append(details)
  }
  if (view.onlyLeft.length > 0) {
    pane.append(el("p", { class: "metrics" }, `only in ${view.left}: ${view.onlyLeft.join(", ")}`))
  }
  if (view.onlyRight.length > 0) {
    pane.append(el("p", { class: "metrics" }, `only in ${view.right}: ${view.onlyRight.join(", ")}`))
  }
}

function renderComparisonItem(
  item: ComparisonItem,
  sides: { left: HTMLElement; right: HTMLElement },
): HTMLElement {
  const row = el("div", { class: "item" },
    el("span", { class: "kind" }, item.kind),
    ` @ ${item.positions.join(",")} `,
    item.detail)
  for (const target of item.targets) {
    if (target.gap) {
      row.append(" ", el("span", { class: "gap-marker" }, `missing in ${target.side}`))
    }
  }
  row.addEventListener("click", () => {
    for (const target of item.targets) {
      const host = sides[target.side]
      flash(host, target.node === null ? target.positions : [target.node])
    }
  })
  return row
}

$("compare-form").addEventListener("submit", event => {
  event.preventDefault()
  enqueue(async () => {
    const base = ($("base-url") as HTMLInputElement).value.replace(/\/+$/, "")
    if (client === null) client = new ServiceClient(base)
    const left = ($("compare-left") as HTMLInputElement).value.trim()
    const right = ($("compare-right") as HTMLInputElement).value.trim()
    const report = await client.compare(left, right)
    banner(null)
    renderComparison(buildComparisonView(report))
  })
})

redraw()

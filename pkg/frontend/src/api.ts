// Client for the annotation service. All state lives on the server;
// this module only shapes requests and decodes responses. A stale
// version (HTTP 409) comes back as a regular outcome rather than an
// exception, because the caller must keep its selection and ask the
// annotator what to do next.

import {
  ComparisonReport,
  Edit,
  IncrementEnvelope,
  Meta,
  SentenceEnvelope,
  SessionInfo,
} from "./types.js"

export class ServiceError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail)
    this.name = "ServiceError"
  }
}

export type EditOutcome =
  | { ok: true; envelope: SentenceEnvelope }
  | { ok: false; conflict: boolean; detail: string }

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>

export class ServiceClient {
  private fetchFn: FetchLike

  constructor(readonly base: string, fetchFn?: FetchLike) {
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init))
  }

  private async send(method: string, path: string, body?: unknown): Promise<unknown> {
    const init: RequestInit = { method }
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" }
      init.body = JSON.stringify(body)
    }
    const response = await this.fetchFn(this.base + path, init)
    if (!response.ok) {
      let detail = `${response.status} ${response.statusText}`
      try {
        const parsed = (await response.json()) as { detail?: unknown }
        if (typeof parsed.detail === "string") detail = parsed.detail
      } catch {
        // non-JSON error body, keep the status line
      }
      throw new ServiceError(response.status, detail)
    }
    return response.json()
  }

  meta(): Promise<Meta> {
    return this.send("GET", "/meta") as Promise<Meta>
  }

  openSession(corpus: string, annotator: string): Promise<SessionInfo> {
    return this.send("POST", "/sessions", { corpus, annotator }) as Promise<SessionInfo>
  }

  sentence(session: string, sentenceId: string): Promise<SentenceEnvelope> {
    return this.send(
      "GET",
      `/sessions/${encodeURIComponent(session)}/sentences/${encodeURIComponent(sentenceId)}`,
    ) as Promise<SentenceEnvelope>
  }

  proposeIncrement(
    session: string,
    sentenceId: string,
    selected: number[],
    category?: string,
  ): Promise<IncrementEnvelope> {
    return this.send(
      "POST",
      `/sessions/${encodeURIComponent(session)}/sentences/${encodeURIComponent(sentenceId)}/increment`,
      { selected, category: category ?? null },
    ) as Promise<IncrementEnvelope>
  }

  async applyEdits(
    session: string,
    sentenceId: string,
    version: number,
    edits: Edit[],
  ): Promise<EditOutcome> {
    try {
      const envelope = (await this.send(
        "POST",
        `/sessions/${encodeURIComponent(session)}/sentences/${encodeURIComponent(sentenceId)}/edits`,
        { version, edits },
      )) as SentenceEnvelope
      return { ok: true, envelope }
    } catch (err) {
      if (err instanceof ServiceError) {
        return { ok: false, conflict: err.status === 409, detail: err.message }
      }
      throw err
    }
  }

  compare(left: string, right: string): Promise<ComparisonReport> {
    return this.send("POST", "/compare", { left, right }) as Promise<ComparisonReport>
  }
}

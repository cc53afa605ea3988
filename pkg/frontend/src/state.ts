/**
 * Single UI store.  Pure data + transition methods; rendering subscribes.
 * Gauge updates are last-write-wins keyed by a per-request sequence taken
 * when the request is *sent*, so a slow stale response can never overwrite
 * a newer page score.
 */

import {
  Language,
  ModelInfo,
  PageScore,
  PostedComment,
  ReviewItem,
  ScoreResult,
} from "./types.js";

export interface UiState {
  comments: PostedComment[];
  pageScore: PageScore | null;
  review: ReviewItem[];
  models: Record<string, ModelInfo>;
  /** Language of the most recent verdict — the active-model indicator. */
  language: Language | null;
  /** Blocking notifier text (submit-time hate notice); null when clear. */
  notice: string | null;
  /** Error banner (schema mismatch etc.); stale data stays rendered. */
  banner: string | null;
  /** Non-fatal toast (double-resolve and similar). */
  toast: string | null;
  /** Latest retrain outcome, e.g. "en model now v2". */
  retrainStatus: string | null;
  apiDown: boolean;
}

export type Listener = (state: UiState) => void;

export class Store {
  readonly state: UiState = {
    comments: [],
    pageScore: null,
    review: [],
    models: {},
    language: null,
    notice: null,
    banner: null,
    toast: null,
    retrainStatus: null,
    apiDown: false,
  };

  private listeners: Listener[] = [];
  private nextSeq = 1;
  private appliedSeq = 0;

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  /** Take a sequence number at request-send time. */
  beginPageScore(): number {
    return this.nextSeq++;
  }

  /** Apply a page score unless a newer request already landed. */
  applyPageScore(score: PageScore, seq: number): boolean {
    if (seq < this.appliedSeq) return false;
    this.appliedSeq = seq;
    this.state.pageScore = score;
    this.state.banner = null;
    this.state.apiDown = false;
    this.emit();
    return true;
  }

  /** Schema mismatch or transport trouble: banner up, stale gauge retained. */
  setBanner(message: string): void {
    this.state.banner = message;
    this.emit();
  }

  addComment(text: string, result: ScoreResult): void {
    this.state.comments.push({ text, result });
    this.state.language = result.language;
    this.state.notice = null;
    this.state.apiDown = false;
    this.emit();
  }

  setNotice(message: string, language?: Language): void {
    this.state.notice = message;
    if (language) this.state.language = language;
    this.emit();
  }

  clearNotice(): void {
    this.state.notice = null;
    this.emit();
  }

  setReview(items: ReviewItem[]): void {
    this.state.review = items;
    this.emit();
  }

  removeReviewItem(id: string): void {
    this.state.review = this.state.review.filter((item) => item.id !== id);
    this.emit();
  }

  setToast(message: string | null): void {
    this.state.toast = message;
    this.emit();
  }

  setModels(models: Record<string, ModelInfo>): void {
    this.state.models = models;
    this.emit();
  }

  setRetrainStatus(message: string): void {
    this.state.retrainStatus = message;
    this.emit();
  }

  setApiDown(down: boolean): void {
    this.state.apiDown = down;
    this.emit();
  }
}

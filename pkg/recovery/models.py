from django.db import models


class TimestampedModel(models.Model):
    """Base model with common timestamp fields"""
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        abstract = True


class ClaimRun(TimestampedModel):
    """One recorded execution of a reproduction claim (``reproduce --record``)."""
    claim_id = models.CharField(max_length=64, db_index=True)
    passed = models.BooleanField()
    seed = models.IntegerField(default=0)
    runtime_seconds = models.FloatField(default=0.0)
    report = models.JSONField(default=dict)

    class Meta:
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['claim_id', '-created_at'], name='claimrun_claim_created_idx'),
        ]

    def __str__(self):
        verdict = 'pass' if self.passed else 'FAIL'
        return f"{self.claim_id} ({verdict}, seed {self.seed})"

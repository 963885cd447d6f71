from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='ClaimRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('claim_id', models.CharField(db_index=True, max_length=64)),
                ('passed', models.BooleanField()),
                ('seed', models.IntegerField(default=0)),
                ('runtime_seconds', models.FloatField(default=0.0)),
                ('report', models.JSONField(default=dict)),
            ],
            options={
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['claim_id', '-created_at'], name='claimrun_claim_created_idx')],
            },
        ),
    ]
